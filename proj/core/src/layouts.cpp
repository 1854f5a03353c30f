#include "dvl/layouts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace dvl {

std::string layout_scope_name(LayoutScope s) {
    switch (s) {
        case LayoutScope::Scalar: return "scalar";
        case LayoutScope::Row: return "row";
        case LayoutScope::Table: return "table";
        case LayoutScope::RelatedRows: return "related-rows";
        case LayoutScope::RelatedTables: return "related-tables";
        case LayoutScope::Global: return "global";
    }
    return "table";
}

namespace {

void put(LayoutResult& out, size_t i, const Extent& e) {
    out.x[i] = e.x;
    out.y[i] = e.y;
    out.w[i] = e.w;
    out.h[i] = e.h;
}

double worst_ratio(const std::vector<double>& areas, size_t begin, size_t end, double side) {
    double sum = 0;
    for (size_t i = begin; i < end; ++i) sum += areas[i];
    double t = sum / side;
    double worst = 1;
    for (size_t i = begin; i < end; ++i) {
        double len = areas[i] / sum * side;
        worst = std::max(worst, std::max(t / len, len / t));
    }
    return worst;
}

} // namespace

LayoutResult squarify(const std::vector<double>& weights, const Extent& extent, bool ordered) {
    size_t n = weights.size();
    double total = 0;
    for (double w : weights) {
        if (w < 0) throw Error("squarify: negative weight");
        total += w;
    }
    if (total <= 0) throw Error("squarify: weights sum to zero");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (!ordered)
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return weights[a] > weights[b]; });

    std::vector<double> areas(n);
    for (size_t i = 0; i < n; ++i) areas[i] = weights[order[i]] / total * extent.area();

    LayoutResult out;
    out.x.resize(n);
    out.y.resize(n);
    out.w.resize(n);
    out.h.resize(n);

    Extent rem = extent;
    size_t i = 0;
    while (i < n) {
        if (areas[i] <= 0) {
            put(out, order[i], {rem.x, rem.y, 0, 0});
            ++i;
            continue;
        }
        bool column = rem.w >= rem.h;       // rows fill the shorter side
        double side = column ? rem.h : rem.w;
        size_t end = i + 1;
        double best = worst_ratio(areas, i, end, side);
        while (end < n && areas[end] > 0) {
            double with_next = worst_ratio(areas, i, end + 1, side);
            if (with_next > best) break;
            best = with_next;
            ++end;
        }
        double row_sum = 0;
        for (size_t k = i; k < end; ++k) row_sum += areas[k];
        double thickness = row_sum / side;
        bool last_row = true;
        for (size_t k = end; k < n; ++k)
            if (areas[k] > 0) last_row = false;
        if (last_row) thickness = column ? rem.w : rem.h; // snap, exact tiling

        double along = 0; // offset along the row
        for (size_t k = i; k < end; ++k) {
            double len = areas[k] / row_sum * side;
            if (k + 1 == end) len = side - along; // snap row end
            if (column)
                put(out, order[k], {rem.x, rem.y + along, thickness, len});
            else
                put(out, order[k], {rem.x + along, rem.y, len, thickness});
            along += len;
        }
        if (column) {
            rem.x += thickness;
            rem.w -= thickness;
        } else {
            rem.y += thickness;
            rem.h -= thickness;
        }
        i = end;
    }
    return out;
}

LayoutResult partition(const std::vector<double>& weights, const Extent& extent, Axis axis) {
    double total = 0;
    for (double w : weights) {
        if (w < 0) throw Error("partition: negative weight");
        total += w;
    }
    if (total <= 0) throw Error("partition: weights sum to zero");

    size_t n = weights.size();
    LayoutResult out;
    out.x.resize(n);
    out.y.resize(n);
    out.w.resize(n);
    out.h.resize(n);
    double along = 0;
    double side = axis == Axis::Vertical ? extent.w : extent.h;
    for (size_t i = 0; i < n; ++i) {
        double len = weights[i] / total * side;
        if (i + 1 == n) len = side - along; // snap
        if (axis == Axis::Vertical)
            put(out, i, {extent.x + along, extent.y, len, extent.h});
        else
            put(out, i, {extent.x, extent.y + along, extent.w, len});
        along += len;
    }
    return out;
}

LayoutResult grid(size_t n, const Extent& extent, std::optional<int> cols) {
    if (n == 0) throw Error("grid: needs at least one cell");
    size_t c = cols ? static_cast<size_t>(*cols)
                    : static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    if (c == 0) throw Error("grid: cols must be positive");
    size_t rows = (n + c - 1) / c;

    LayoutResult out;
    out.x.resize(n);
    out.y.resize(n);
    out.w.resize(n);
    out.h.resize(n);
    for (size_t i = 0; i < n; ++i) {
        size_t col = i % c, row = i / c;
        double x0 = extent.x + extent.w * static_cast<double>(col) / static_cast<double>(c);
        double x1 = extent.x + extent.w * static_cast<double>(col + 1) / static_cast<double>(c);
        double y0 = extent.y + extent.h * static_cast<double>(row) / static_cast<double>(rows);
        double y1 = extent.y + extent.h * static_cast<double>(row + 1) / static_cast<double>(rows);
        put(out, i, {x0, y0, x1 - x0, y1 - y0});
    }
    return out;
}

LayoutResult tree_layout(const std::vector<std::pair<Value, Value>>& edges, const Extent& extent) {
    size_t n = edges.size();
    std::vector<int> parent(n, -1);
    std::vector<std::vector<size_t>> children(n);
    auto index_of = [&](const Value& key) -> int {
        for (size_t i = 0; i < n; ++i)
            if (value_equals(edges[i].first, key)) return static_cast<int>(i);
        return -1;
    };
    std::vector<size_t> roots;
    for (size_t i = 0; i < n; ++i) {
        const Value& p = edges[i].second;
        if (is_null(p) || value_equals(p, edges[i].first)) {
            roots.push_back(i);
            continue;
        }
        int pi = index_of(p);
        if (pi < 0)
            throw Error("tree: parent '" + value_to_string(p) + "' of node '" +
                        value_to_string(edges[i].first) + "' not found");
        parent[i] = pi;
        children[pi].push_back(i);
    }

    // Depths; a walk longer than n nodes is a cycle.
    std::vector<int> depth(n, -1);
    for (size_t i = 0; i < n; ++i) {
        size_t steps = 0;
        int at = static_cast<int>(i);
        while (at >= 0 && depth[at] < 0) {
            ++steps;
            if (steps > n)
                throw Error("tree: cycle through node '" + value_to_string(edges[i].first) + "'");
            at = parent[at];
        }
        int base = at < 0 ? -1 : depth[at];
        // Re-walk to assign.
        at = static_cast<int>(i);
        std::vector<int> chain;
        while (at >= 0 && depth[at] < 0) {
            chain.push_back(at);
            at = parent[at];
        }
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = ++base;
    }
    int max_depth = 0;
    for (int d : depth) max_depth = std::max(max_depth, d);

    // Leaves in DFS order get sequential slots; parents center over children.
    std::vector<double> xs(n, 0);
    size_t nleaves = 0;
    for (size_t i = 0; i < n; ++i)
        if (children[i].empty()) ++nleaves;
    size_t next_slot = 0;
    auto place = [&](auto&& self, size_t node) -> double {
        if (children[node].empty()) {
            xs[node] = extent.x + (static_cast<double>(next_slot++) + 0.5) * extent.w /
                                      static_cast<double>(nleaves);
            return xs[node];
        }
        double sum = 0;
        for (size_t c : children[node]) sum += self(self, c);
        xs[node] = sum / static_cast<double>(children[node].size());
        return xs[node];
    };
    for (size_t r : roots) place(place, r);

    LayoutResult out;
    out.x.resize(n);
    out.y.resize(n);
    out.w.assign(n, 0);
    out.h.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        out.x[i] = xs[i];
        out.y[i] = extent.y + (static_cast<double>(depth[i]) + 0.5) * extent.h /
                                  static_cast<double>(max_depth + 1);
    }
    return out;
}

LayoutResult force_layout(const std::vector<std::pair<Value, Value>>& edges,
                          const std::vector<Value>& node_keys,
                          const std::vector<std::pair<double, double>>& node_sizes,
                          const Extent& extent, uint64_t seed, int iterations) {
    size_t n = node_keys.size();
    if (n == 0) return {};
    auto index_of = [&](const Value& key) -> int {
        for (size_t i = 0; i < n; ++i)
            if (value_equals(node_keys[i], key)) return static_cast<int>(i);
        return -1;
    };
    std::vector<std::pair<size_t, size_t>> links;
    for (const auto& [s, t] : edges) {
        int si = index_of(s), ti = index_of(t);
        if (si < 0 || ti < 0)
            throw Error("force: edge endpoint '" + value_to_string(si < 0 ? s : t) +
                        "' is not a node key");
        if (si != ti) links.emplace_back(si, ti);
    }

    auto half = [&](size_t i) -> std::pair<double, double> {
        if (i < node_sizes.size()) return {node_sizes[i].first / 2, node_sizes[i].second / 2};
        return {0, 0};
    };

    SeededRng rng(seed);
    std::vector<double> px(n), py(n);
    for (size_t i = 0; i < n; ++i) {
        auto [hw, hh] = half(i);
        double w = std::max(extent.w - 2 * hw, 0.0);
        double h = std::max(extent.h - 2 * hh, 0.0);
        px[i] = extent.x + hw + rng.next_unit() * w;
        py[i] = extent.y + hh + rng.next_unit() * h;
    }

    double area = extent.area();
    double k = std::sqrt(area / static_cast<double>(n));
    double t0 = 0.1 * std::min(extent.w, extent.h);
    std::vector<double> dx(n), dy(n);
    for (int it = 0; it < iterations; ++it) {
        double temp = t0 * (1.0 - static_cast<double>(it) / static_cast<double>(iterations));
        std::fill(dx.begin(), dx.end(), 0.0);
        std::fill(dy.begin(), dy.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                double ddx = px[i] - px[j], ddy = py[i] - py[j];
                double dist = std::sqrt(ddx * ddx + ddy * ddy);
                auto [iw, ih] = half(i);
                auto [jw, jh] = half(j);
                // node-size sensitivity: measure from the boundaries
                double inset = (iw + ih + jw + jh) / 2;
                double d = std::max(dist - inset, 0.01);
                double f = k * k / d;
                double ux = dist > 1e-12 ? ddx / dist : 1.0;
                double uy = dist > 1e-12 ? ddy / dist : 0.0;
                dx[i] += ux * f;
                dy[i] += uy * f;
                dx[j] -= ux * f;
                dy[j] -= uy * f;
            }
        }
        for (const auto& [s, t] : links) {
            double ddx = px[s] - px[t], ddy = py[s] - py[t];
            double dist = std::max(std::sqrt(ddx * ddx + ddy * ddy), 1e-12);
            double f = dist * dist / k;
            double ux = ddx / dist, uy = ddy / dist;
            dx[s] -= ux * f;
            dy[s] -= uy * f;
            dx[t] += ux * f;
            dy[t] += uy * f;
        }
        for (size_t i = 0; i < n; ++i) {
            double len = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
            if (len > 1e-12) {
                double step = std::min(len, temp);
                px[i] += dx[i] / len * step;
                py[i] += dy[i] / len * step;
            }
            auto [hw, hh] = half(i);
            px[i] = std::clamp(px[i], extent.x + hw, extent.x + std::max(extent.w - hw, hw));
            py[i] = std::clamp(py[i], extent.y + hh, extent.y + std::max(extent.h - hh, hh));
        }
    }

    LayoutResult out;
    out.x = std::move(px);
    out.y = std::move(py);
    out.w.assign(n, 0);
    out.h.assign(n, 0);
    return out;
}

namespace {

/// Connectivity over the constraint graph, direction-blind.
bool tables_connected(const Database& db, const std::string& a, const std::string& b) {
    if (a == b) return true;
    std::set<std::string> seen = {a};
    std::vector<std::string> frontier = {a};
    while (!frontier.empty()) {
        std::string at = frontier.back();
        frontier.pop_back();
        for (const auto& [name, fk] : db.constraints) {
            std::string other;
            if (fk.src_table == at) other = fk.dst_table;
            else if (fk.dst_table == at) other = fk.src_table;
            else continue;
            if (other == b) return true;
            if (seen.insert(other).second) frontier.push_back(other);
        }
    }
    return false;
}

} // namespace

LayoutInputCheck validate_layout_inputs(const Database& db, const PlotSpec& spec,
                                        const ViewSpec& view, const LayoutBinding& binding) {
    LayoutInputCheck check;
    if (!db.has_table(view.table)) {
        check.message = "view table '" + view.table + "' does not exist";
        return check;
    }
    const Table& table = db.table(view.table);
    switch (binding.algo) {
        case LayoutAlgo::SQ:
        case LayoutAlgo::OS:
        case LayoutAlgo::VT:
        case LayoutAlgo::HZ:
            if (!binding.weight_attr.empty() && !table.schema.has_attribute(binding.weight_attr)) {
                check.message = "weight attribute '" + binding.weight_attr + "' not in '" +
                                view.table + "'";
                return check;
            }
            check.scope = LayoutScope::Table;
            break;
        case LayoutAlgo::EQ:
            check.scope = LayoutScope::Table;
            break;
        case LayoutAlgo::Tree:
            for (const auto& attr : {binding.child_attr, binding.parent_attr}) {
                if (!table.schema.has_attribute(attr)) {
                    check.message = "tree attribute '" + attr + "' not in '" + view.table + "'";
                    return check;
                }
            }
            check.scope = LayoutScope::Table;
            break;
        case LayoutAlgo::Force: {
            if (!db.has_table(binding.edges->table)) {
                check.message = "edge table '" + binding.edges->table + "' does not exist";
                return check;
            }
            const Table& et = db.table(binding.edges->table);
            for (const auto& attr : {binding.edges->src, binding.edges->dst}) {
                if (!et.schema.has_attribute(attr)) {
                    check.message = "edge attribute '" + attr + "' not in '" +
                                    binding.edges->table + "'";
                    return check;
                }
            }
            // Initializer tables must relate to the view's table somehow.
            if (!tables_connected(db, binding.edges->table, view.table)) {
                check.message = "layout initialized from '" + binding.edges->table +
                                "', which has no foreign key path to '" + view.table + "'";
                return check;
            }
            check.scope = LayoutScope::RelatedTables;
            break;
        }
    }
    check.ok = true;
    return check;
}

} // namespace dvl
