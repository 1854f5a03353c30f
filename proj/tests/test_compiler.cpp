#include <doctest.h>

#include <cstring>
#include "dvl/compiler.hpp"
#include "dvl/fixtures.hpp"

using namespace dvl;

namespace {

Database nodelink_db() {
    Database db;
    db.add_table(load_table("id,age,sal\n1,30,50\n2,40,60\n3,50,55", "N", {}, {{"id"}}));
    db.add_table(load_table("s,t\n1,2\n2,3", "E"));
    db.add_constraint({"C1", "E", {"s"}, "N", {"id"}});
    db.add_constraint({"C2", "E", {"t"}, "N", {"id"}});
    return db;
}

const char* kNodelinkSpec = R"x({
  "width": 800, "height": 600,
  "views": [
    {"name":"VN","table":"N","mark":"point",
     "encodings":{"x":{"field":"age"},"y":{"field":"sal"}}},
    {"name":"VE","table":"E","mark":"link",
     "encodings":{
       "x1":{"ref":{"view":"VN","filter":["s"],"props":{"x1":"x","y1":"y"}}},
       "x2":{"ref":{"view":"VN","filter":["t"],"props":{"x2":"x","y2":"y"}}}}}
  ]})x";

int node_index(const TaskGraph& g, Task::Kind kind, const std::string& view) {
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i].kind == kind && g.nodes[i].view == view) return static_cast<int>(i);
    return -1;
}

int order_pos(const TaskGraph& g, int node) {
    for (size_t i = 0; i < g.order.size(); ++i)
        if (g.order[i] == node) return static_cast<int>(i);
    return -1;
}

} // namespace

TEST_CASE("compile orders node instantiation before link resolution") {
    Database db = nodelink_db();
    PlotSpec spec = parse_spec(kNodelinkSpec);
    TaskGraph g = compile(spec, db);
    int vn = node_index(g, Task::Kind::InstantiateMarks, "VN");
    int resolve = node_index(g, Task::Kind::ResolveForeign, "VE");
    REQUIRE(vn >= 0);
    REQUIRE(resolve >= 0);
    CHECK(order_pos(g, vn) < order_pos(g, resolve));
    // render comes last
    CHECK(g.nodes[g.order.back()].kind == Task::Kind::Render);

    std::string plan = g.to_json();
    CHECK(plan.find("InstantiateMarks") != std::string::npos);
    CHECK(plan.find("ResolveForeign") != std::string::npos);
    CHECK(plan.find("\"edges\"") != std::string::npos);
}

TEST_CASE("independent views share no edges") {
    Database db;
    db.add_table(load_table("a,b\n1,2", "T"));
    db.add_table(load_table("c,d\n3,4", "U"));
    PlotSpec spec = parse_spec(R"x({
      "views":[
        {"name":"V1","table":"T","mark":"point","encodings":{"x":{"field":"a"},"y":{"field":"b"}}},
        {"name":"V2","table":"U","mark":"point","encodings":{"x":{"field":"c"},"y":{"field":"d"}}}
      ]})x");
    TaskGraph g = compile(spec, db);
    int v1 = node_index(g, Task::Kind::InstantiateMarks, "V1");
    int v2 = node_index(g, Task::Kind::InstantiateMarks, "V2");
    for (const auto& [from, to] : g.edges) {
        CHECK_FALSE((from == v1 && to == v2));
        CHECK_FALSE((from == v2 && to == v1));
    }
}

TEST_CASE("mutual references on the same channels are a compile-time cycle") {
    Database db;
    db.add_table(load_table("id,v\n1,2", "T", {}, {{"id"}}));
    // two views over one table referencing each other's x by key
    PlotSpec spec = parse_spec(R"x({
      "views":[
        {"name":"VA","table":"T","mark":"point",
         "encodings":{"x":{"ref":{"view":"VB","filter":["id"],"props":{"x":"x"}}},
                      "y":{"const":5}}},
        {"name":"VB","table":"T","mark":"point",
         "encodings":{"x":{"ref":{"view":"VA","filter":["id"],"props":{"x":"x"}}},
                      "y":{"const":9}}}
      ]})x");
    CHECK_THROWS_WITH_AS(compile(spec, db), doctest::Contains("cycle"), Error);
}

TEST_CASE("execute resolves links to node centers and keeps cardinality") {
    Database db = nodelink_db();
    PlotSpec spec = parse_spec(kNodelinkSpec);
    ExecutionResult r = execute(compile(spec, db), db);
    CHECK(r.marks.at("VN").records.size() == db.table("N").rows.size());
    CHECK(r.marks.at("VE").records.size() == db.table("E").rows.size());

    const MarkTable& vn = r.marks.at("VN");
    const MarkTable& ve = r.marks.at("VE");
    // edge 0 runs node 1 -> node 2
    CHECK(*as_number(*ve.channel(0, "x1")) == *as_number(*vn.channel(0, "x")));
    CHECK(*as_number(*ve.channel(0, "y1")) == *as_number(*vn.channel(0, "y")));
    CHECK(*as_number(*ve.channel(0, "x2")) == *as_number(*vn.channel(1, "x")));

    // defaults fill unset optional channels
    CHECK(*as_number(*vn.channel(0, "r")) == 3.0);
    CHECK(value_to_string(*vn.channel(0, "color")) == "black");
    CHECK(*as_number(*ve.channel(0, "strokeWidth")) == 1.0);
}

TEST_CASE("re-resolution after a jitter expression keeps links consistent") {
    Database db = nodelink_db();
    std::string jittered = kNodelinkSpec;
    size_t pos = jittered.find("{\"field\":\"sal\"}");
    REQUIRE(pos != std::string::npos);
    jittered.replace(pos, strlen("{\"field\":\"sal\"}"), "{\"expr\":\"sal + (id % 3) * 11\"}");
    PlotSpec spec = parse_spec(jittered);
    ExecutionResult r = execute(compile(spec, db), db);
    const MarkTable& vn = r.marks.at("VN");
    const MarkTable& ve = r.marks.at("VE");
    for (size_t e = 0; e < ve.records.size(); ++e) {
        int64_t s = std::get<int64_t>(db.table("E").rows[e][0]);
        // nodes are keyed 1..3 and loaded in key order
        CHECK(value_equals(*ve.channel(e, "y1"), *vn.channel(size_t(s - 1), "y")));
    }
}

TEST_CASE("empty tables yield empty mark tables without errors") {
    Database db;
    db.add_table(load_table("a,b\n", "T", {{"a", {TypeKind::Integer}}, {"b", {TypeKind::Integer}}}));
    PlotSpec spec = parse_spec(R"x({
      "views":[{"name":"V","table":"T","mark":"point",
                "encodings":{"x":{"field":"a"},"y":{"field":"b"}}}]})x");
    ExecutionResult r = execute(compile(spec, db), db);
    CHECK(r.marks.at("V").records.empty());
    CHECK(marks_to_json(r).find("\"records\": []") != std::string::npos);
}

TEST_CASE("nested marks stay inside their parent extents") {
    FixtureRun run = run_fixture("gallery-small-multiples");
    const NestAssignment& na = run.result.nest_assignments.at("VA");
    const MarkTable& child = run.result.marks.at("VA");
    for (size_t r = 0; r < child.records.size(); ++r) {
        CHECK(na.extents[r].contains(child.records[r].extent, 1e-6));
    }
}

TEST_CASE("selector nests place each child view in its own parent extent") {
    FixtureRun run = run_fixture("case-parallel-coords");
    std::set<std::pair<double, double>> origins;
    for (const char* view : {"VLsex", "VLage", "VLchol"}) {
        const NestAssignment& na = run.result.nest_assignments.at(view);
        REQUIRE(!na.extents.empty());
        origins.insert({na.extents[0].x, na.extents[0].y});
        // all rows of one selected view share the host extent
        for (const auto& e : na.extents) CHECK(e == na.extents[0]);
    }
    CHECK(origins.size() == 3);
}

TEST_CASE("execution is deterministic byte for byte") {
    for (const char* name : {"nodelink", "hive-housing", "er-diagram"}) {
        FixtureRun a = run_fixture(name);
        FixtureRun b = run_fixture(name);
        CHECK(a.marks_json == b.marks_json);
        CHECK(a.svg == b.svg);
    }
}

TEST_CASE("text metrics are glyph-based") {
    CHECK(measure_text_width("abcd", 10) == doctest::Approx(24));
    CHECK(measure_text_width("", 10) == 0);
    CHECK(measure_text_height(10) == doctest::Approx(12));
}

TEST_CASE("square marks take equal width and height") {
    Database db;
    db.add_table(load_table("a\n1\n2", "T"));
    PlotSpec spec = parse_spec(R"x({
      "views":[{"name":"V","table":"T","mark":"square",
                "encodings":{"x":{"field":"a"},"y":{"const":10},"w":{"const":24}}}]})x");
    ExecutionResult r = execute(compile(spec, db), db);
    CHECK(*as_number(*r.marks.at("V").channel(0, "h")) == 24);
    CHECK(r.marks.at("V").records[0].extent.w == 24);
    CHECK(r.marks.at("V").records[0].extent.h == 24);
}

TEST_CASE("compile rejects specs that fail validation") {
    Database db;
    db.add_table(load_table("a\n1", "T"));
    PlotSpec spec = parse_spec(R"x({
      "views":[{"name":"V","table":"Nope","mark":"point"}]})x");
    CHECK_THROWS_WITH_AS(compile(spec, db), doctest::Contains("does not validate"), Error);
}
