#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

struct Extent {
    double x = 0, y = 0;  // top-left
    double w = 0, h = 0;

    double area() const { return w * h; }
    bool contains(const Extent& inner, double eps = 1e-9) const {
        return inner.x >= x - eps && inner.y >= y - eps &&
               inner.x + inner.w <= x + w + eps && inner.y + inner.h <= y + h + eps;
    }
    bool operator==(const Extent&) const = default;
};

enum class LayoutScope { Scalar, Row, Table, RelatedRows, RelatedTables, Global };

std::string layout_scope_name(LayoutScope s);

/// Per-input-row channel vectors, aligned by row position.
struct LayoutResult {
    std::vector<double> x, y, w, h;

    size_t size() const { return x.size(); }
};

/// Squarified treemap tiling (Bruls et al.). `ordered` keeps the input order
/// (OS); otherwise weights are processed in descending order and the output
/// re-aligned to input positions (SQ).
LayoutResult squarify(const std::vector<double>& weights, const Extent& extent, bool ordered);

enum class Axis { Vertical, Horizontal };  // VT slices along x, HZ stacks along y

LayoutResult partition(const std::vector<double>& weights, const Extent& extent, Axis axis);

/// Equal cells, row-major; cols defaults to ceil(sqrt(n)).
LayoutResult grid(size_t n, const Extent& extent, std::optional<int> cols = {});

/// Layered tree drawing: y by depth, parents centered over children.
/// Edges are (child key, parent key); a null/self parent marks a root.
LayoutResult tree_layout(const std::vector<std::pair<Value, Value>>& edges, const Extent& extent);

/// Size-aware Fruchterman-Reingold with a seeded xorshift generator;
/// deterministic for fixed (seed, iterations, input order).
LayoutResult force_layout(const std::vector<std::pair<Value, Value>>& edges,
                          const std::vector<Value>& node_keys,
                          const std::vector<std::pair<double, double>>& node_sizes,
                          const Extent& extent, uint64_t seed, int iterations);

struct LayoutInputCheck {
    bool ok = false;
    LayoutScope scope = LayoutScope::Table;
    std::string message;
};

/// A layout may only be initialized with tables connected to the referencing
/// view's table by some foreign-key path (any arity).
LayoutInputCheck validate_layout_inputs(const Database& db, const PlotSpec& spec,
                                        const ViewSpec& view, const LayoutBinding& binding);

/// Deterministic generator used for force seeding (xorshift64*).
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dull;
    }

    /// Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

private:
    uint64_t state_;
};

} // namespace dvl
