#include "dvl/scales.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dvl {

Scale make_scale(const ScaleSpec& spec) {
    Scale s;
    s.name = spec.name;
    s.kind = spec.kind;
    if (spec.domain && spec.kind != ScaleKind::Identity) {
        s.domain_fixed = true;
        s.trained = true;
        if (spec.kind == ScaleKind::Linear) {
            if (spec.domain->size() != 2)
                throw Error("scale '" + spec.name + "': linear domain must be [min, max]");
            auto lo = as_number(spec.domain->at(0)), hi = as_number(spec.domain->at(1));
            if (!lo || !hi) throw Error("scale '" + spec.name + "': numeric domain expected");
            s.dmin = *lo;
            s.dmax = *hi;
            if (s.dmin > s.dmax) throw Error("scale '" + spec.name + "': domain min > max");
        } else {
            s.categories = *spec.domain;
        }
    }
    if (spec.range) {
        s.range_set = true;
        s.rlo = spec.range->first;
        s.rhi = spec.range->second;
    }
    return s;
}

void Scale::train(const std::vector<Value>& values) {
    Scale& scale = *this;
    if (scale.kind == ScaleKind::Identity || scale.domain_fixed) return;
    if (scale.kind == ScaleKind::Linear) {
        for (const auto& v : values) {
            if (is_null(v)) continue;
            auto n = as_number(v);
            if (!n)
                throw Error("linear scale '" + scale.name + "' trained on non-numeric value '" +
                            value_to_string(v) + "'");
            if (!scale.trained) {
                scale.dmin = scale.dmax = *n;
                scale.trained = true;
            } else {
                scale.dmin = std::min(scale.dmin, *n);
                scale.dmax = std::max(scale.dmax, *n);
            }
        }
        return;
    }
    for (const auto& v : values) {
        if (is_null(v)) continue;
        bool seen = false;
        for (const auto& c : scale.categories)
            if (value_equals(c, v)) { seen = true; break; }
        if (!seen) scale.categories.push_back(v);
    }
    scale.trained = true;
}

void Scale::set_range(double lo, double hi) {
    Scale& scale = *this;
    scale.range_set = true;
    scale.rlo = lo;
    scale.rhi = hi;
}

double Scale::apply(const Value& value) const {
    const Scale& scale = *this;
    if (scale.kind == ScaleKind::Identity) {
        auto n = as_number(value);
        if (!n) throw Error("identity scale applied to non-numeric value");
        return *n;
    }
    if (!scale.trained) throw Error("scale '" + scale.name + "' applied before training");
    if (!scale.range_set) throw Error("scale '" + scale.name + "' has no range");
    if (scale.kind == ScaleKind::Linear) {
        auto n = as_number(value);
        if (!n) throw Error("linear scale applied to non-numeric value '" + value_to_string(value) + "'");
        if (scale.dmin == scale.dmax) return (scale.rlo + scale.rhi) / 2.0;
        double t = (*n - scale.dmin) / (scale.dmax - scale.dmin);
        t = std::clamp(t, 0.0, 1.0); // out-of-domain values stay on canvas
        return scale.rlo + t * (scale.rhi - scale.rlo);
    }
    for (size_t i = 0; i < scale.categories.size(); ++i)
        if (value_equals(scale.categories[i], value))
            return scale.rlo + (static_cast<double>(i) + 0.5) *
                                   (scale.rhi - scale.rlo) / static_cast<double>(scale.categories.size());
    throw Error("ordinal scale '" + scale.name + "': value '" + value_to_string(value) +
                "' not in domain");
}

bool domains_equal(const Scale& a, const Scale& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ScaleKind::Identity) return true;
    if (!a.trained || !b.trained) return false;
    if (a.kind == ScaleKind::Linear) return a.dmin == b.dmin && a.dmax == b.dmax;
    if (a.categories.size() != b.categories.size()) return false;
    for (size_t i = 0; i < a.categories.size(); ++i)
        if (!value_equals(a.categories[i], b.categories[i])) return false;
    return true;
}

bool ranges_equal(const Scale& a, const Scale& b) {
    return a.range_set && b.range_set && a.rlo == b.rlo && a.rhi == b.rhi;
}

const std::string& ordinal_color(size_t index) {
    static const std::vector<std::string> palette = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[index % palette.size()];
}

std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    // light-to-dark blue ramp
    const int from[3] = {222, 235, 247};
    const int to[3] = {8, 48, 107};
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(from[0] + t * (to[0] - from[0]))),
                  static_cast<int>(std::lround(from[1] + t * (to[1] - from[1]))),
                  static_cast<int>(std::lround(from[2] + t * (to[2] - from[2]))));
    return buf;
}

} // namespace dvl
