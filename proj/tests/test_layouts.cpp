#include <doctest.h>

#include <random>

#include "dvl/layouts.hpp"

using namespace dvl;

namespace {

// Exact rectangle arithmetic oracles for the tiling checks.

double pair_overlap_area(const LayoutResult& r, size_t i, size_t j) {
    double w = std::min(r.x[i] + r.w[i], r.x[j] + r.w[j]) - std::max(r.x[i], r.x[j]);
    double h = std::min(r.y[i] + r.h[i], r.y[j] + r.h[j]) - std::max(r.y[i], r.y[j]);
    return std::max(w, 0.0) * std::max(h, 0.0);
}

void check_tiling(const LayoutResult& r, const Extent& extent,
                  const std::vector<double>& weights) {
    double total_weight = 0;
    for (double w : weights) total_weight += w;
    double area_sum = 0;
    for (size_t i = 0; i < r.size(); ++i) {
        Extent e{r.x[i], r.y[i], r.w[i], r.h[i]};
        CHECK(e.w >= 0);
        CHECK(e.h >= 0);
        CHECK(extent.contains(e, 1e-7));
        area_sum += e.area();
        // exact proportionality, relative to the extent
        double expected = weights[i] / total_weight;
        CHECK(std::abs(e.area() / extent.area() - expected) <= 1e-9);
        for (size_t j = i + 1; j < r.size(); ++j)
            CHECK(pair_overlap_area(r, i, j) <= 1e-7); // interiors disjoint
    }
    CHECK(std::abs(area_sum - extent.area()) <= 1e-6 * extent.area());
}

double worst_aspect(const LayoutResult& r) {
    double worst = 1;
    for (size_t i = 0; i < r.size(); ++i)
        if (r.w[i] > 0 && r.h[i] > 0)
            worst = std::max(worst, std::max(r.w[i] / r.h[i], r.h[i] / r.w[i]));
    return worst;
}

} // namespace

TEST_CASE("squarify tiles a single weight with the full extent") {
    Extent e{0, 0, 10, 10};
    auto r = squarify({6}, e, false);
    CHECK(r.x[0] == 0);
    CHECK(r.w[0] == 10);
    CHECK(r.h[0] == 10);
}

TEST_CASE("squarify canonical example: exact areas on a 6x4 extent") {
    Extent e{0, 0, 6, 4};
    std::vector<double> weights = {6, 6, 4, 3, 2, 2, 1};
    auto r = squarify(weights, e, false);
    check_tiling(r, e, weights);
    for (size_t i = 0; i < weights.size(); ++i)
        CHECK(r.w[i] * r.h[i] == doctest::Approx(weights[i]).epsilon(1e-9));
    // squarified beats slice-and-dice on worst aspect ratio here
    auto vt = partition(weights, e, Axis::Vertical);
    CHECK(worst_aspect(r) <= worst_aspect(vt));
}

TEST_CASE("ordered squarify keeps input order; unordered is permutation-stable") {
    Extent e{0, 0, 6, 4};
    std::vector<double> w1 = {1, 6, 2, 6, 4, 2, 3};
    std::vector<double> w2 = {6, 6, 4, 3, 2, 2, 1}; // sorted view of w1
    auto unordered1 = squarify(w1, e, false);
    auto unordered2 = squarify(w2, e, false);
    // permuting inputs permutes outputs identically (aligned by weight value)
    for (size_t i = 0; i < w1.size(); ++i) {
        bool found = false;
        for (size_t j = 0; j < w2.size(); ++j) {
            if (w1[i] == w2[j] && unordered1.x[i] == unordered2.x[j] &&
                unordered1.y[i] == unordered2.y[j] && unordered1.w[i] == unordered2.w[j])
                found = true;
        }
        CHECK(found);
    }
    check_tiling(squarify(w1, e, true), e, w1); // OS still tiles
}

TEST_CASE("squarify on 200 random weight vectors holds tiling and proportionality") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng() % 12;
        std::vector<double> weights;
        for (size_t i = 0; i < n; ++i) weights.push_back(1 + (rng() % 1000) / 10.0);
        if (trial % 7 == 0) weights[rng() % n] = 0; // zero weights allowed
        double total = 0;
        for (double w : weights) total += w;
        if (total == 0) continue;
        Extent e{double(rng() % 50), double(rng() % 50), 10 + double(rng() % 500),
                 10 + double(rng() % 500)};
        bool ordered = trial % 2 == 0;
        check_tiling(squarify(weights, e, ordered), e, weights);
    }
}

TEST_CASE("squarify rejects all-zero weights") {
    CHECK_THROWS_AS(squarify({0, 0}, {0, 0, 10, 10}, false), Error);
    CHECK_THROWS_AS(squarify({}, {0, 0, 10, 10}, false), Error);
}

TEST_CASE("vertical partition slices widths proportionally") {
    auto r = partition({1, 3}, {0, 0, 100, 50}, Axis::Vertical);
    CHECK(r.w[0] == doctest::Approx(25));
    CHECK(r.w[1] == doctest::Approx(75));
    CHECK(r.x[1] == doctest::Approx(25)); // offsets are prefix sums
    CHECK(r.h[0] == 50);
    check_tiling(r, {0, 0, 100, 50}, {1, 3});
}

TEST_CASE("horizontal partition with one weight fills the extent") {
    auto r = partition({42}, {5, 5, 100, 50}, Axis::Horizontal);
    CHECK(r.x[0] == 5);
    CHECK(r.y[0] == 5);
    CHECK(r.w[0] == 100);
    CHECK(r.h[0] == 50);
}

TEST_CASE("grid defaults to a near-square column count") {
    auto r = grid(4, {0, 0, 100, 100}, 2);
    CHECK(r.x[0] == 0);
    CHECK(r.y[0] == 0);
    CHECK(r.x[1] == 50);
    CHECK(r.y[2] == 50); // row-major
    CHECK(r.x[3] == 50);
    CHECK(r.w[0] == 50);

    auto one = grid(1, {0, 0, 80, 60});
    CHECK(one.w[0] == 80);
    CHECK(one.h[0] == 60);

    auto three = grid(3, {0, 0, 100, 100}, 2);
    CHECK(three.x[2] == 0);
    CHECK(three.y[2] == 50);
    CHECK(three.w[2] == 50);
    CHECK(three.h[2] == 50); // trailing cell stays cell-sized
}

TEST_CASE("tree layout centers parents over children") {
    // rows: root, two children
    std::vector<std::pair<Value, Value>> edges = {
        {int64_t{0}, Value{}}, {int64_t{1}, int64_t{0}}, {int64_t{2}, int64_t{0}}};
    auto r = tree_layout(edges, {0, 0, 100, 90});
    CHECK(r.x[0] == doctest::Approx((r.x[1] + r.x[2]) / 2));
    CHECK(r.y[0] < r.y[1]);
    CHECK(r.y[1] == r.y[2]);
}

TEST_CASE("tree layout stacks a chain at equal x") {
    std::vector<std::pair<Value, Value>> edges = {
        {int64_t{0}, int64_t{0}}, {int64_t{1}, int64_t{0}}, {int64_t{2}, int64_t{1}}};
    auto r = tree_layout(edges, {0, 0, 100, 90});
    CHECK(r.x[0] == r.x[1]);
    CHECK(r.x[1] == r.x[2]);
    CHECK(r.y[0] < r.y[1]);
    CHECK(r.y[1] < r.y[2]);
}

TEST_CASE("tree layout gives distinct positions on random forests") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        size_t n = 1 + rng() % 20;
        std::vector<std::pair<Value, Value>> edges;
        for (size_t i = 0; i < n; ++i) {
            Value parent = i == 0 || rng() % 4 == 0 ? Value{} : Value{int64_t(rng() % i)};
            edges.push_back({int64_t(i), parent});
        }
        auto r = tree_layout(edges, {0, 0, 100, 100});
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                CHECK((r.x[i] != r.x[j] || r.y[i] != r.y[j]));
    }
}

TEST_CASE("tree layout reports cycles with a witness") {
    std::vector<std::pair<Value, Value>> edges = {
        {int64_t{0}, int64_t{1}}, {int64_t{1}, int64_t{0}}};
    CHECK_THROWS_WITH_AS(tree_layout(edges, {0, 0, 10, 10}), doctest::Contains("cycle"), Error);
}

TEST_CASE("force layout is deterministic and clamped") {
    std::vector<Value> keys = {int64_t{1}, int64_t{2}, int64_t{3}};
    std::vector<std::pair<Value, Value>> edges = {{int64_t{1}, int64_t{2}},
                                                  {int64_t{2}, int64_t{3}}};
    Extent e{0, 0, 200, 100};
    auto a = force_layout(edges, keys, {}, e, 99, 100);
    auto b = force_layout(edges, keys, {}, e, 99, 100);
    for (size_t i = 0; i < keys.size(); ++i) {
        CHECK(a.x[i] == b.x[i]); // bit-identical
        CHECK(a.y[i] == b.y[i]);
        CHECK(a.x[i] >= 0);
        CHECK(a.x[i] <= 200);
        CHECK(a.y[i] >= 0);
        CHECK(a.y[i] <= 100);
    }
    auto c = force_layout(edges, keys, {}, e, 100, 100);
    bool same = true;
    for (size_t i = 0; i < keys.size(); ++i)
        if (a.x[i] != c.x[i] || a.y[i] != c.y[i]) same = false;
    CHECK_FALSE(same); // different seed moves something
}

TEST_CASE("force layout zero iterations returns the seeded placement") {
    std::vector<Value> keys = {int64_t{1}, int64_t{2}};
    auto a = force_layout({}, keys, {}, {0, 0, 100, 100}, 5, 0);
    auto b = force_layout({}, keys, {}, {0, 0, 100, 100}, 5, 0);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
}

TEST_CASE("force layout pulls two linked distant nodes together") {
    std::vector<Value> keys = {int64_t{1}, int64_t{2}};
    std::vector<std::pair<Value, Value>> edges = {{int64_t{1}, int64_t{2}}};
    // seed 3 places the pair ~1000px apart, beyond the k = sqrt(area/n)
    // equilibrium distance, so the edge pulls them together
    Extent e{0, 0, 1000, 1000};
    auto before = force_layout(edges, keys, {}, e, 3, 0);
    auto after = force_layout(edges, keys, {}, e, 3, 300);
    auto dist = [](const LayoutResult& r) {
        double dx = r.x[0] - r.x[1], dy = r.y[0] - r.y[1];
        return std::sqrt(dx * dx + dy * dy);
    };
    CHECK(dist(after) < dist(before));
}

TEST_CASE("force layout rejects dangling edge endpoints") {
    CHECK_THROWS_AS(
        force_layout({{int64_t{1}, int64_t{9}}}, {int64_t{1}}, {}, {0, 0, 10, 10}, 1, 1),
        Error);
}
