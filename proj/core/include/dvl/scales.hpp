#pragma once

#include <string>
#include <vector>

#include "dvl/relcore.hpp"
#include "dvl/specmodel.hpp"

namespace dvl {

/// A trainable scale function. Linear and ordinal scales learn their domain
/// from value streams; identity passes numbers through. Ranges are bound by
/// the compiler from the view extent unless given explicitly.
struct Scale {
    std::string name;  // empty for per-encoding private scales
    ScaleKind kind = ScaleKind::Linear;

    bool domain_fixed = false;  // explicit domain: training is a no-op
    bool trained = false;
    double dmin = 0, dmax = 0;          // linear
    std::vector<Value> categories;      // ordinal, first-appearance order

    bool range_set = false;
    double rlo = 0, rhi = 1;

    /// Folds a value stream into the domain. Idempotent on repeated streams;
    /// mixed (non-numeric into linear) types are an error.
    void train(const std::vector<Value>& values);

    void set_range(double lo, double hi);

    /// Linear: affine map, clamped to range, midpoint on a degenerate domain.
    /// Ordinal: evenly spaced band centers. Identity: the numeric value itself.
    double apply(const Value& value) const;
};

Scale make_scale(const ScaleSpec& spec);

bool domains_equal(const Scale& a, const Scale& b);
bool ranges_equal(const Scale& a, const Scale& b);

/// One application of a scale to a (view, channel, attribute) slot, recorded
/// during execution for the faithfulness checker.
struct ScaleInstance {
    std::string scale_name;  // empty = private
    std::string view;
    std::string channel;
    std::string attr;
    Scale scale;  // domain + bound range snapshot
};

/// Fixed 10-color ordinal palette.
const std::string& ordinal_color(size_t index);

/// Two-stop linear ramp, t in [0,1], interpolated in RGB.
std::string ramp_color(double t);

} // namespace dvl
