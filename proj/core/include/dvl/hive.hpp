#pragma once

#include <string>
#include <vector>

#include "dvl/dataprep.hpp"
#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

/// A parsed HiVE program: sHier/sLayout/sSize/sColor statements over the
/// root path. Per-level lists are padded with "_" (unset) to |hier|.
struct HiveProgram {
    std::vector<std::string> hier;
    std::vector<std::string> layouts;  // SQ/OS/VT/HZ/EQ per level
    std::vector<std::string> sizes;    // attribute or "_"
    std::vector<std::string> colors;   // attribute or "_"
};

/// Grammar: statements `sHier|sLayout|sSize|sColor` `( / , arg... )`
/// separated by `;`, whitespace-insensitive. Args are `$name`, a layout
/// code, or `_`. Errors carry line:column positions.
HiveProgram parse_hive(const std::string& src);

/// Canonical text whose re-parse equals the program.
std::string print_hive(const HiveProgram& prog);

struct HiveCompilation {
    TransformPlan plan;  // hier decomposition + drop of the base table
    PlotSpec spec;       // one rect view per level, nested along the chain
    std::vector<std::string> level_tables;
};

/// Lowers the program to a hierarchical decomposition of `table` plus a
/// nested space-filling spec (avg aggregates for size/color attributes).
HiveCompilation compile_hive(const HiveProgram& prog, const std::string& table,
                             const Database& db, double width = 800, double height = 600);

} // namespace dvl
