#pragma once

#include <string>
#include <vector>

#include "dvl/compiler.hpp"
#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

struct CoverageEntry {
    std::string table;
    std::string view;  // empty if unmapped
    bool mapped = false;
};

struct OverlapEvidence {
    Row key_a, key_b;
    double overlap_fraction = 0;
};

struct KeyCheck {
    std::string view;
    bool satisfied = true;
    std::vector<OverlapEvidence> violations;
};

struct FkCheck {
    std::string constraint;
    bool preserved = false;
    /// one of foreign-attribute-traversal / explicit-mark / nesting / shared-scale
    std::string mechanism;
    std::string detail;     // evidence, or the nearest miss when violated
    std::string alignment;  // highest alignment rung, for shared-scale only
};

struct FaithfulnessReport {
    std::vector<CoverageEntry> coverage;
    std::vector<KeyCheck> key_checks;
    std::vector<FkCheck> fk_checks;
    bool faithful = false;

    std::string to_json() const;
    std::string to_text() const;
};

/// Marks overlapping more than `threshold` (fraction of the smaller area)
/// are indistinguishable: the view fails its key clause. Zero-area marks
/// compare by exact extent coincidence.
KeyCheck check_keys(const MarkTable& marks, double threshold = 0.95);

std::vector<CoverageEntry> check_coverage(const Database& db, const PlotSpec& spec);

/// Per-constraint preservation verdicts over the executed visualization.
std::vector<FkCheck> check_fk_preservation(const Database& db, const PlotSpec& spec,
                                           const ExecutionResult& result);

/// Highest satisfied reinforcement rung for a shared-scale preserved
/// constraint: shared-domain, relative-alignment, shared-channel,
/// absolute-alignment, spatial-proximity. Informational.
std::string alignment_level(const PlotSpec& spec, const ExecutionResult& result,
                            const ForeignKey& fk, double proximity_gap = 20.0);

FaithfulnessReport check_faithfulness(const Database& db, const PlotSpec& spec,
                                      const ExecutionResult& result, double threshold = 0.95);

} // namespace dvl
