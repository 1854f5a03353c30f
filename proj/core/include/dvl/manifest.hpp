#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dvl/dataprep.hpp"
#include "dvl/relcore.hpp"

namespace dvl {

struct ManifestTable {
    std::string name;
    std::string path;  // resolved relative to the manifest file
    std::vector<std::vector<std::string>> keys;
    std::map<std::string, AttributeType> types;
};

/// The database manifest: tables to load, declared constraints, and an
/// optional preparation plan.
struct Manifest {
    std::vector<ManifestTable> tables;
    std::vector<ForeignKey> constraints;
    std::optional<TransformPlan> prep;

    static Manifest parse(const std::string& text);
};

/// Loads tables via `read_file` (path -> payload) and registers constraints.
/// The prep plan is NOT applied; the compiler owns that.
Database load_database(const Manifest& manifest,
                       const std::function<std::string(const std::string&)>& read_file);

/// Convenience wrapper resolving paths against the manifest's directory.
Database load_database_from_dir(const Manifest& manifest, const std::string& base_dir);

std::string read_text_file(const std::string& path);

} // namespace dvl
