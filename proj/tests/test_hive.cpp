#include <doctest.h>

#include "dvl/compiler.hpp"
#include "dvl/hive.hpp"

using namespace dvl;

namespace {

const char* kHousingProgram =
    "sHier(/,$city,$type);        sLayout(/,SQ,SQ);\n"
    "sSize(/,$price,$bdrms);      sColor(/,_,$bdrms)\n";

Database housing_db() {
    Database db;
    db.add_table(load_table("city,type,price,bdrms\n"
                            "nyc,house,90,4\nnyc,condo,60,2\nsf,house,120,5\nsf,condo,80,2\n",
                            "housing"));
    return db;
}

} // namespace

TEST_CASE("parse_hive reads the housing program") {
    HiveProgram prog = parse_hive(kHousingProgram);
    CHECK(prog.hier == std::vector<std::string>{"city", "type"});
    CHECK(prog.layouts == std::vector<std::string>{"SQ", "SQ"});
    CHECK(prog.sizes == std::vector<std::string>{"price", "bdrms"});
    CHECK(prog.colors == std::vector<std::string>{"_", "bdrms"});
}

TEST_CASE("parse_hive pads missing statements") {
    HiveProgram prog = parse_hive("sHier(/,$a)");
    CHECK(prog.hier == std::vector<std::string>{"a"});
    CHECK(prog.sizes == std::vector<std::string>{"_"});
    CHECK(prog.colors == std::vector<std::string>{"_"});
    CHECK(prog.layouts == std::vector<std::string>{"SQ"});
}

TEST_CASE("parse_hive rejects bad input with positions") {
    CHECK_THROWS_WITH_AS(parse_hive("sLayout(/,XX)"), doctest::Contains("unknown layout code"),
                         Error);
    CHECK_THROWS_WITH_AS(parse_hive("sFoo(/,$a)"), doctest::Contains("unknown statement"), Error);
    CHECK_THROWS_WITH_AS(parse_hive("sHier(x,$a)"), doctest::Contains("path '/' expected"),
                         Error);
    CHECK_THROWS_WITH_AS(parse_hive("sHier(/,$a); sHier(/,$b)"), doctest::Contains("duplicate"),
                         Error);
    CHECK_THROWS_AS(parse_hive("sLayout(/,SQ)"), Error);  // no sHier
    CHECK_THROWS_WITH_AS(parse_hive("sHier(/,$a) sLayout(/,SQ)"), doctest::Contains("';'"),
                         Error);
}

TEST_CASE("print/parse round-trips the program") {
    HiveProgram prog = parse_hive(kHousingProgram);
    HiveProgram again = parse_hive(print_hive(prog));
    CHECK(again.hier == prog.hier);
    CHECK(again.layouts == prog.layouts);
    CHECK(again.sizes == prog.sizes);
    CHECK(again.colors == prog.colors);
}

TEST_CASE("compile_hive produces a valid nested spec over the decomposition") {
    Database db = housing_db();
    HiveCompilation hive = compile_hive(parse_hive(kHousingProgram), "housing", db);
    REQUIRE(hive.level_tables.size() == 2);
    REQUIRE(hive.spec.views.size() == 2);
    CHECK(hive.spec.views[1].encodings.count("color") == 1);
    REQUIRE(hive.spec.nests.size() == 1);

    Database prepared = db;
    apply_plan(prepared, hive.plan);
    CHECK_FALSE(prepared.has_table("housing"));
    CHECK(prepared.has_table(hive.level_tables[0]));
    CHECK(validate_spec(hive.spec, prepared).empty());
}

TEST_CASE("one-level programs compile to a single partitioned view") {
    Database db = housing_db();
    HiveCompilation hive =
        compile_hive(parse_hive("sHier(/,$city); sLayout(/,VT); sSize(/,$price)"), "housing", db);
    CHECK(hive.spec.views.size() == 1);
    CHECK(hive.spec.nests.empty());
    ExecutionResult r = execute(compile(hive.spec, db, &hive.plan), db);
    CHECK(r.marks.at("V1").records.size() == 2);  // nyc, sf
}

TEST_CASE("compiled housing treemap nests leaves inside their parents") {
    Database db = housing_db();
    HiveCompilation hive = compile_hive(parse_hive(kHousingProgram), "housing", db);
    ExecutionResult r = execute(compile(hive.spec, db, &hive.plan), db);
    const MarkTable& leaves = r.marks.at("V2");
    const NestAssignment& na = r.nest_assignments.at("V2");
    REQUIRE(leaves.records.size() == 4);
    for (size_t i = 0; i < leaves.records.size(); ++i)
        CHECK(na.extents[i].contains(leaves.records[i].extent, 1e-7));
}

TEST_CASE("compile_hive rejects missing attributes") {
    Database db = housing_db();
    CHECK_THROWS_AS(compile_hive(parse_hive("sHier(/,$nope)"), "housing", db), Error);
}
