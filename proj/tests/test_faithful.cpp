#include <doctest.h>

#include <random>

#include "dvl/faithful.hpp"
#include "dvl/fixtures.hpp"

using namespace dvl;

namespace {

MarkTable points_at(const std::vector<std::pair<double, double>>& pts, double r = 3) {
    MarkTable mt;
    mt.view = "V";
    mt.mark = MarkType::Point;
    int64_t key = 0;
    for (const auto& [x, y] : pts) {
        MarkRecord rec;
        rec.key = {key++};
        rec.channels["x"] = x;
        rec.channels["y"] = y;
        rec.channels["r"] = r;
        rec.extent = mark_extent(MarkType::Point, rec);
        mt.records.push_back(std::move(rec));
    }
    return mt;
}

MarkTable rects_at(const std::vector<Extent>& extents) {
    MarkTable mt;
    mt.view = "V";
    mt.mark = MarkType::Rect;
    int64_t key = 0;
    for (const auto& e : extents) {
        MarkRecord rec;
        rec.key = {key++};
        rec.channels["x"] = e.x;
        rec.channels["y"] = e.y;
        rec.channels["w"] = e.w;
        rec.channels["h"] = e.h;
        rec.extent = mark_extent(MarkType::Rect, rec);
        mt.records.push_back(std::move(rec));
    }
    return mt;
}

} // namespace

TEST_CASE("identical points are a key violation with full overlap") {
    KeyCheck check = check_keys(points_at({{10, 10}, {10, 10}}));
    CHECK_FALSE(check.satisfied);
    REQUIRE(check.violations.size() == 1);
    CHECK(check.violations[0].overlap_fraction == 1.0);
}

TEST_CASE("disjoint rects pass the key check") {
    KeyCheck check = check_keys(rects_at({{0, 0, 10, 10}, {20, 0, 10, 10}}));
    CHECK(check.satisfied);
}

TEST_CASE("the 95 percent threshold splits 96 from 94 percent overlaps") {
    // 10x10 rects shifted by 0.4: intersection 96; shifted by 0.6: 94
    KeyCheck over = check_keys(rects_at({{0, 0, 10, 10}, {0, 0.4, 10, 10}}));
    CHECK_FALSE(over.satisfied);
    CHECK(over.violations[0].overlap_fraction == doctest::Approx(0.96));

    KeyCheck under = check_keys(rects_at({{0, 0, 10, 10}, {0, 0.6, 10, 10}}));
    CHECK(under.satisfied);
}

TEST_CASE("random non-overlapping rects pass with exact intersection arithmetic") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Extent> extents;
        for (int i = 0; i < 10; ++i) {
            // a grid jittered inside disjoint 50x50 slots
            double x = (i % 5) * 50 + (rng() % 10);
            double y = (i / 5) * 50 + (rng() % 10);
            extents.push_back({x, y, 20 + double(rng() % 15), 20 + double(rng() % 15)});
        }
        CHECK(check_keys(rects_at(extents)).satisfied);
    }
}

TEST_CASE("zero-area marks violate only on coincidence") {
    MarkTable mt = points_at({{5, 5}, {5, 9}}, 0);
    CHECK(check_keys(mt).satisfied);
    MarkTable dup = points_at({{5, 5}, {5, 5}}, 0);
    CHECK_FALSE(check_keys(dup).satisfied);
}

TEST_CASE("links overplot only when their segments coincide") {
    MarkTable mt;
    mt.view = "L";
    mt.mark = MarkType::Link;
    auto add = [&](double x1, double y1, double x2, double y2) {
        MarkRecord rec;
        rec.key = {int64_t(mt.records.size())};
        rec.channels["x1"] = x1;
        rec.channels["y1"] = y1;
        rec.channels["x2"] = x2;
        rec.channels["y2"] = y2;
        rec.extent = mark_extent(MarkType::Link, rec);
        mt.records.push_back(std::move(rec));
    };
    add(0, 0, 100, 100);
    add(0, 10, 100, 60);  // nested bbox, visually distinct
    CHECK(check_keys(mt).satisfied);
    add(100, 100, 0, 0);  // the first segment, reversed
    CHECK_FALSE(check_keys(mt).satisfied);
}

TEST_CASE("coverage flags unmapped tables") {
    Database db;
    db.add_table(load_table("a\n1", "T"));
    db.add_table(load_table("b\n2", "U"));
    PlotSpec spec = parse_spec(R"x({
      "views":[{"name":"V","table":"T","mark":"point",
                "encodings":{"x":{"field":"a"},"y":{"const":1}}}]})x");
    auto coverage = check_coverage(db, spec);
    REQUIRE(coverage.size() == 2);
    CHECK(coverage[0].mapped);  // T
    CHECK(coverage[0].view == "V");
    CHECK_FALSE(coverage[1].mapped);  // U

    Database empty;
    CHECK(check_coverage(empty, spec).empty());
}

TEST_CASE("alignment climbs to spatial proximity for the table design") {
    FixtureRun run = run_fixture("gallery-table");
    const ForeignKey& fk = run.result.prepared.constraints.at("C");
    CHECK(alignment_level(run.spec, run.result, fk) == "spatial-proximity");
}

TEST_CASE("different channels with equal domains reach relative alignment at most") {
    Database db;
    db.add_table(load_table("id,s\n0,a\n1,b\n2,c", "S", {}, {{"id"}}));
    db.add_table(load_table("id,t\n0,x\n1,y\n2,z", "T", {}, {{"id"}}));
    db.add_constraint({"C", "S", {"id"}, "T", {"id"}});
    // same named scale but S.id on y and T.id on x, with a pinned range
    PlotSpec spec = parse_spec(R"x({
      "width":600,"height":600,
      "scales":{"sid":{"type":"linear","range":[0,500]}},
      "views":[
        {"name":"VS","table":"S","mark":"label",
         "encodings":{"x":{"const":0},"y":{"field":"id","scale":"sid"},"text":{"field":"s"}}},
        {"name":"VT","table":"T","mark":"label",
         "encodings":{"x":{"field":"id","scale":"sid"},"y":{"const":0},"text":{"field":"t"}}}
      ]})x");
    ExecutionResult r = execute(compile(spec, db), db);
    auto checks = check_fk_preservation(db, spec, r);
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].preserved);
    CHECK(checks[0].mechanism == "shared-scale");
    CHECK(checks[0].alignment == "relative-alignment");
}

TEST_CASE("fixture twins fail on exactly the mutated constraint") {
    struct Case {
        const char* pass;
        const char* fail;
        const char* constraint;
        const char* mechanism;
    };
    const Case cases[] = {
        {"nodelink", "nodelink-noref", "C1", "foreign-attribute-traversal"},
        {"label-explicit", "label-explicit-broken", "C", "explicit-mark"},
        {"gallery-small-multiples", "small-multiples-unnested", "fk_A2_B2", "nesting"},
        {"gallery-categorical-scatter", "categorical-unshared", "C", "shared-scale"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.pass);
        FixtureRun good = run_fixture(c.pass);
        CHECK(good.report.faithful);
        bool found = false;
        for (const auto& fk : good.report.fk_checks)
            if (fk.constraint == c.constraint) {
                found = true;
                CHECK(fk.preserved);
                CHECK(fk.mechanism == c.mechanism);
            }
        CHECK(found);

        FixtureRun bad = run_fixture(c.fail);
        CHECK_FALSE(bad.report.faithful);
        for (const auto& fk : bad.report.fk_checks) {
            CAPTURE(fk.constraint);
            CHECK(fk.preserved == (fk.constraint != c.constraint));
        }
        for (const auto& k : bad.report.key_checks) CHECK(k.satisfied);
        for (const auto& cov : bad.report.coverage) CHECK(cov.mapped);
    }
}

TEST_CASE("report serializes to json and text") {
    FixtureRun run = run_fixture("nodelink-broken");
    std::string j = run.report.to_json();
    CHECK(j.find("\"faithful\": false") != std::string::npos);
    CHECK(j.find("\"constraint\": \"C1\"") != std::string::npos);
    std::string t = run.report.to_text();
    CHECK(t.find("VIOLATED") != std::string::npos);
    CHECK(t.find("verdict: unfaithful") != std::string::npos);
}
