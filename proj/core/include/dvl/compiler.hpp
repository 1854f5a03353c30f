#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dvl/dataprep.hpp"
#include "dvl/marks.hpp"
#include "dvl/relcore.hpp"
#include "dvl/scales.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

struct Task {
    enum class Kind {
        Transform,
        TrainScale,
        InstantiateMarks,
        ResolveForeign,
        RunLayout,
        NestExtents,
        Render
    };
    Kind kind;
    std::string view;    // owning view, when applicable
    std::string detail;  // step / scale / ref channels / layout / nest description
};

std::string task_kind_name(Task::Kind k);

/// Compiled plan: tasks, data-dependency edges, and the stable topological
/// order execution follows. Carries the spec and prep plan it was built from.
struct TaskGraph {
    PlotSpec spec;
    TransformPlan prep;
    std::vector<Task> nodes;
    std::vector<std::pair<int, int>> edges;  // from -> to
    std::vector<int> order;

    std::string to_json() const;  // --emit-plan payload
};

/// Per-child-row nest assignment, recorded for geometry checks.
struct NestAssignment {
    std::string parent_view;
    std::vector<int> parent_row;   // index into the parent's records
    std::vector<Extent> extents;   // the extent each child row renders within
};

struct ExecutionResult {
    std::vector<std::string> view_order;
    std::map<std::string, MarkTable> marks;
    std::map<std::string, Scale> named_scales;
    std::vector<ScaleInstance> scale_instances;
    std::map<std::string, NestAssignment> nest_assignments;  // by child view
    Database prepared;  // database after transforms
};

/// Validates references and builds the task graph. Dependency cycles are
/// compile errors listing the cycle.
TaskGraph compile(const PlotSpec& spec, const Database& db,
                  const TransformPlan* prep = nullptr);

/// Runs the graph: transforms, scale training, mark instantiation, foreign
/// resolution, layouts, and nesting, in stable topological order.
ExecutionResult execute(const TaskGraph& graph, const Database& db);

/// Deterministic JSON dump of every mark table (golden-test format).
std::string marks_to_json(const ExecutionResult& result);

/// Glyph-count text metrics: 0.6 em advance, 1.2 em line height. Keeps
/// geometry font-independent across platforms.
double measure_text_width(const std::string& text, double font_size);
double measure_text_height(double font_size);

} // namespace dvl
