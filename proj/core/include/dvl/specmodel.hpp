#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dvl/dataprep.hpp"
#include "dvl/relcore.hpp"

namespace dvl {

enum class MarkType { Point, Rect, Square, Link, Label, Text };

MarkType mark_from_name(const std::string& name);
std::string mark_name(MarkType m);

/// Channels a mark type accepts.
const std::vector<std::string>& channels_for(MarkType m);

/// Aggregating reducer on a foreign reference; `over` is an expression over
/// the matched mark's channels (empty for count).
struct RefAgg {
    AggOp op = AggOp::Count;
    std::string over;

    bool operator==(const RefAgg&) const = default;
};

/// One `get`-style reference: filter selects target marks per source row,
/// props maps channels to target channel names (or expressions over them).
struct ForeignRefSpec {
    enum class Filter { SourceAttrs, Predicate, All };

    std::string view;  // target view name
    Filter filter_kind = Filter::All;
    std::vector<std::string> filter_attrs;                    // SourceAttrs
    std::vector<std::pair<std::string, Value>> predicate;     // Predicate: target col = const
    std::vector<std::pair<std::string, std::string>> props;   // channel -> prop or expression
    std::optional<RefAgg> agg;

    bool operator==(const ForeignRefSpec&) const = default;
};

/// A layout binding destructured into channel slots.
struct LayoutUse {
    std::string name;
    std::vector<std::string> channels;

    bool operator==(const LayoutUse&) const = default;
};

struct Encoding {
    enum class Kind { Field, Const, Expression, Ref, Layout };
    Kind kind = Kind::Const;

    std::string field;
    std::string scale;  // optional named scale for Field
    Value constant;
    std::string expr;                          // Expression source text
    std::shared_ptr<ForeignRefSpec> ref;       // shared across its channels
    std::shared_ptr<LayoutUse> layout;         // shared across its channels

    bool operator==(const Encoding& o) const;
};

struct ViewSpec {
    std::string name;
    std::string table;
    MarkType mark = MarkType::Point;
    std::map<std::string, Encoding> encodings;  // channel -> encoding

    bool operator==(const ViewSpec&) const = default;
};

struct NestDecl {
    std::string parent;
    // Either a single child related by a constraint/attribute pairs, or a
    // per-parent-row selection over several child views.
    std::string child;
    std::optional<std::string> using_constraint;
    std::vector<std::pair<std::string, std::string>> using_pairs;  // (child attr, parent attr)
    std::vector<std::string> children;   // selector form
    std::string by_attr;                 // parent attribute driving the selection
    std::map<std::string, std::string> by_map;  // attribute value -> child view

    bool is_selector() const { return !children.empty(); }
    bool operator==(const NestDecl&) const = default;
};

enum class ScaleKind { Linear, Ordinal, Identity };

ScaleKind scale_kind_from_name(const std::string& name);
std::string scale_kind_name(ScaleKind k);

struct ScaleSpec {
    std::string name;
    ScaleKind kind = ScaleKind::Linear;
    std::optional<std::vector<Value>> domain;
    std::optional<std::pair<double, double>> range;

    bool operator==(const ScaleSpec&) const = default;
};

enum class LayoutAlgo { SQ, OS, VT, HZ, EQ, Tree, Force };

LayoutAlgo layout_algo_from_name(const std::string& name);
std::string layout_algo_name(LayoutAlgo a);

/// Output channel slots of an algorithm (x,y,w,h for space-filling; x,y else).
const std::vector<std::string>& layout_outputs(LayoutAlgo a);

struct EdgeSource {
    std::string table;
    std::string src;
    std::string dst;

    bool operator==(const EdgeSource&) const = default;
};

struct LayoutBinding {
    std::string name;
    LayoutAlgo algo = LayoutAlgo::SQ;
    std::string weight_attr;               // SQ/OS/VT/HZ; empty = constant weight
    double weight_const = 1.0;
    std::optional<int> cols;               // EQ
    std::string child_attr, parent_attr;   // tree (edges over the view's own table)
    std::optional<EdgeSource> edges;       // force
    uint64_t seed = 0;
    int iterations = 300;

    bool operator==(const LayoutBinding&) const = default;
};

struct PlotSpec {
    double width = 800;
    double height = 600;
    std::vector<ViewSpec> views;
    std::vector<NestDecl> nests;
    std::map<std::string, ScaleSpec> scales;
    std::map<std::string, LayoutBinding> layouts;

    const ViewSpec* find_view(const std::string& name) const;
    bool operator==(const PlotSpec&) const = default;
};

struct Diagnostic {
    std::string path;     // where (JSON-pointer-ish or view/channel context)
    std::string message;
};

/// Structural parse: schema violations and duplicate/unknown fields are
/// reported with their JSON path. No database needed.
PlotSpec parse_spec(const std::string& document);

/// Canonical serialization: sorted keys, shortest round-trip floats,
/// multi-channel encodings emitted once under their first channel.
std::string serialize_spec(const PlotSpec& spec);

/// Reference-level validation against a prepared database. Empty result
/// means compile cannot fail on resolution.
std::vector<Diagnostic> validate_spec(const PlotSpec& spec, const Database& db);

} // namespace dvl
