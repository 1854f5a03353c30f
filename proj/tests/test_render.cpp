#include <doctest.h>

#include "dvl/fixtures.hpp"
#include "dvl/render.hpp"

using namespace dvl;

namespace {

ExecutionResult execute_spec(Database& db, const std::string& spec_text, PlotSpec& spec) {
    spec = parse_spec(spec_text);
    return execute(compile(spec, db), db);
}

} // namespace

TEST_CASE("a point renders as a circle at its resolved position") {
    Database db;
    db.add_table(load_table("x,y\n25,75", "T"));
    PlotSpec spec;
    ExecutionResult r = execute_spec(db, R"x({
      "views":[{"name":"V","table":"T","mark":"point",
                "encodings":{"x":{"const":25},"y":{"const":75}}}]})x", spec);
    std::string svg = render_svg(build_scene(r, spec));
    CHECK(svg.find("<circle cx=\"25.000\" cy=\"75.000\" r=\"3.000\"") != std::string::npos);
}

TEST_CASE("curved links become paths that keep their endpoints") {
    Database db;
    db.add_table(load_table("a\n1", "T"));
    PlotSpec spec;
    ExecutionResult r = execute_spec(db, R"x({
      "views":[{"name":"V","table":"T","mark":"link",
                "encodings":{"x1":{"const":10},"y1":{"const":20},
                             "x2":{"const":90},"y2":{"const":40},
                             "curve":{"const":true}}}]})x", spec);
    std::string svg = render_svg(build_scene(r, spec));
    CHECK(svg.find("<path d=\"M 10.000 20.000 C") != std::string::npos);
    CHECK(svg.find("90.000 40.000\"") != std::string::npos);
}

TEST_CASE("key column labels are underlined") {
    FixtureRun run = run_fixture("er-diagram");
    CHECK(run.svg.find("text-decoration=\"underline\"") != std::string::npos);
}

TEST_CASE("empty scenes render a bare svg element") {
    Scene scene;
    scene.width = 400;
    scene.height = 300;
    std::string svg = render_svg(scene);
    CHECK(svg.find("width=\"400.000\" height=\"300.000\"") != std::string::npos);
    CHECK(svg.find("<circle") == std::string::npos);
    CHECK(svg.find("<rect") == std::string::npos);
}

TEST_CASE("rendering is byte-deterministic") {
    FixtureRun a = run_fixture("gallery-punchcard");
    FixtureRun b = run_fixture("gallery-punchcard");
    CHECK(a.svg == b.svg);
}

TEST_CASE("the scatter fixture renders one circle per row") {
    FixtureRun run = run_fixture("gallery-scatter");
    size_t circles = 0, pos = 0;
    while ((pos = run.svg.find("<circle", pos)) != std::string::npos) {
        ++circles;
        pos += 7;
    }
    CHECK(circles == run.result.prepared.table("T").rows.size());
}

TEST_CASE("rendered link endpoints equal the mark channels exactly") {
    FixtureRun run = run_fixture("nodelink");
    const MarkTable& ve = run.result.marks.at("VE");
    for (const auto& rec : ve.records) {
        char want[160];
        std::snprintf(want, sizeof(want), "x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"",
                      *as_number(rec.channels.at("x1")), *as_number(rec.channels.at("y1")),
                      *as_number(rec.channels.at("x2")), *as_number(rec.channels.at("y2")));
        CHECK(run.svg.find(want) != std::string::npos);
    }
}

TEST_CASE("linear axes carry five quantile ticks") {
    Database db;
    db.add_table(load_table("a,b\n0,0\n10,100", "T"));
    PlotSpec spec;
    ExecutionResult r = execute_spec(db, R"x({
      "views":[{"name":"V","table":"T","mark":"point",
                "encodings":{"x":{"field":"a"},"y":{"field":"b"}}}]})x", spec);
    Scene scene = build_scene(r, spec);
    size_t x_ticks = 0, y_ticks = 0;
    for (const auto& t : scene.ticks) (t.x_axis ? x_ticks : y_ticks)++;
    CHECK(x_ticks == 5);
    CHECK(y_ticks == 5);
}
