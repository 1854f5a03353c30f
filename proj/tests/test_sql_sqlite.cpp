#include <doctest.h>

#include <random>

#include "sqlite_harness.hpp"

using namespace dvl;
using dvltest::plan_matches_sqlite;

namespace {

Database heart_base() {
    Database db;
    db.add_table(load_table("cp,slope,chol,age\n0,1,250,60\n0,2,199,51\n1,1,240,48\n0,1,180,55",
                            "T"));
    return db;
}

} // namespace

TEST_CASE("groupby/select/drop plans execute identically on sqlite") {
    TransformPlan plan = TransformPlan::from_json(R"x({"steps":[
      {"op":"groupby","table":"T","as":"G","keys":["cp","slope"],
       "aggs":[{"op":"count","as":"n"},{"op":"avg","attr":"chol","as":"c"},
               {"op":"sum","attr":"age","as":"a"},{"op":"min","attr":"age","as":"lo"},
               {"op":"max","attr":"age","as":"hi"}]},
      {"op":"select","table":"T","as":"S","projections":[["*","*"],["sel","chol > 230"],
        ["label","format('{cp}/{slope}')"],["half","age / 2"],["m","age % 7"]]},
      {"op":"drop","table":"T"}
    ]})x");
    CHECK(plan_matches_sqlite(heart_base(), plan));
}

TEST_CASE("normalize and normalize_many plans execute identically on sqlite") {
    TransformPlan plan = TransformPlan::from_json(R"x({"steps":[
      {"op":"normalize","table":"T","attrs":["cp"],"dim":"CP","fact":"F"},
      {"op":"drop","table":"T"}
    ]})x");
    CHECK(plan_matches_sqlite(heart_base(), plan));

    TransformPlan many = TransformPlan::from_json(R"x({"steps":[
      {"op":"normalize_many","table":"T","groups":[["cp"],["slope"]],
       "dims":["CP","SL"],"fact":"F"},
      {"op":"drop","table":"T"}
    ]})x");
    CHECK(plan_matches_sqlite(heart_base(), many));
}

TEST_CASE("hier and join plans execute identically on sqlite") {
    Database db;
    db.add_table(load_table(
        "city,type,price,bdrms\nnyc,house,10,3\nnyc,condo,20,2\nsf,house,30,4\nnyc,house,14,1",
        "H"));
    TransformPlan plan = TransformPlan::from_json(R"x({"steps":[
      {"op":"hier","table":"H","hierarchy":["city","type"],"names":["Tc","Tt"],
       "aggs":[[{"op":"avg","attr":"price","as":"price"}],[{"op":"avg","attr":"bdrms","as":"bdrms"}]]},
      {"op":"drop","table":"H"}
    ]})x");
    CHECK(plan_matches_sqlite(db, plan));

    Database nl;
    nl.add_table(load_table("id,age,sal\n1,30,50\n2,40,60\n3,35,55", "N", {}, {{"id"}}));
    nl.add_table(load_table("s,t\n1,2\n2,3\n3,1\n1,3", "E"));
    TransformPlan jp = TransformPlan::from_json(R"x({"steps":[
      {"op":"join","left":"E","right":"N","as":"E1","on":[["s","id"]],
       "projections":[["s","s"],["t","t"],["age1","age"],["sal1","sal"],["id","E_id"]]},
      {"op":"join","left":"E1","right":"N","as":"E2","on":[["t","id"]],
       "projections":[["s","s"],["t","t"],["age1","age1"],["sal1","sal1"],
                      ["age2","age"],["sal2","sal"],["id","E1_id"]]},
      {"op":"drop","table":"E1"},
      {"op":"drop","table":"E"}
    ]})x");
    CHECK(plan_matches_sqlite(nl, jp));
}

TEST_CASE("random normalize plans match sqlite execution") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        std::string csv = "a,b,c\n";
        int nrows = 1 + static_cast<int>(rng() % 10);
        for (int r = 0; r < nrows; ++r)
            csv += std::to_string(rng() % 3) + "," + std::to_string(rng() % 3) + "," +
                   std::to_string(rng() % 5) + "\n";
        Database db;
        db.add_table(load_table(csv, "T"));
        TransformPlan plan = TransformPlan::from_json(R"x({"steps":[
          {"op":"normalize","table":"T","attrs":["a","b"],"dim":"D","fact":"F"},
          {"op":"groupby","table":"F","as":"G","keys":["D_id"],
           "aggs":[{"op":"count","as":"n"},{"op":"sum","attr":"c","as":"sc"}]},
          {"op":"drop","table":"T"}
        ]})x");
        CHECK(plan_matches_sqlite(db, plan));
    }
}
