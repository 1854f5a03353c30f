#include <doctest.h>

#include "dvl/relcore.hpp"

using namespace dvl;

TEST_CASE("load_table infers types and synthesizes an id key") {
    Table t = load_table("a,b\n1,x\n2,y", "T");
    CHECK(t.schema.attributes.size() == 3);
    CHECK(t.schema.attributes[0].name == "a");
    CHECK(t.schema.attributes[0].type.kind == TypeKind::Integer);
    CHECK(t.schema.attributes[1].type.kind == TypeKind::Text);
    CHECK(t.schema.attributes[2].name == "id");
    CHECK(t.schema.primary_key == std::vector<std::string>{"id"});
    REQUIRE(t.rows.size() == 2);
    CHECK(std::get<int64_t>(t.rows[1][2]) == 1);
}

TEST_CASE("load_table keeps hinted schema for an empty json array") {
    Table t = load_table("[]", "T", {{"a", {TypeKind::Integer}}});
    CHECK(t.rows.empty());
    REQUIRE(t.schema.attributes.size() == 2); // a + synthesized id
    CHECK(t.schema.attributes[0].name == "a");
    CHECK(t.schema.attributes[0].type.kind == TypeKind::Integer);
}

TEST_CASE("load_table rejects a violated declared key") {
    CHECK_THROWS_WITH_AS(load_table("a\n1\n1", "T", {}, {{"a"}}),
                         doctest::Contains("key"), Error);
}

TEST_CASE("load_table reports ragged rows and duplicate headers") {
    CHECK_THROWS_AS(load_table("a,b\n1", "T"), Error);
    CHECK_THROWS_AS(load_table("a,a\n1,2", "T"), Error);
    CHECK_THROWS_AS(load_table("a\nx", "T", {{"a", {TypeKind::Integer}}}), Error);
}

TEST_CASE("load_table parses rfc4180 quoting") {
    Table t = load_table("a,b\n\"x,\"\"y\"\"\",2\n,3", "T");
    CHECK(std::get<std::string>(t.rows[0][0]) == "x,\"y\"");
    CHECK(is_null(t.rows[1][0]));
    CHECK(std::get<int64_t>(t.rows[1][1]) == 3);
}

TEST_CASE("check_key over projections") {
    Table t = load_table("id,second\n1,a\n2,a", "T", {}, {{"id"}});
    CHECK(check_key(t, {"id"}));
    CHECK_FALSE(check_key(t, {"second"}));
    CHECK(check_key(t, {"id", "second"}));
    Table empty = load_table("x\n", "E");
    CHECK(check_key(empty, {"x"}));
    CHECK_THROWS_AS(check_key(t, {"nope"}), Error);
}

namespace {

Database nodes_edges(const std::string& edge_csv) {
    Database db;
    db.add_table(load_table("id,age,sal\n1,30,50\n2,40,60", "N", {}, {{"id"}}));
    db.add_table(load_table(edge_csv, "E"));
    return db;
}

ForeignKey edge_fk(const std::string& attr) {
    ForeignKey fk;
    fk.name = "C1";
    fk.src_table = "E";
    fk.src_attrs = {attr};
    fk.dst_table = "N";
    fk.dst_attrs = {"id"};
    return fk;
}

} // namespace

TEST_CASE("check_fk validates inclusion, with vacuous truths") {
    auto db = nodes_edges("s\n1");
    ForeignKey fk = edge_fk("s");
    fk.dst_is_key = true;
    CHECK(check_fk(db, fk));

    auto bad = nodes_edges("s\n3");
    CHECK_FALSE(check_fk(bad, fk));

    auto empty = nodes_edges("s\n");
    CHECK(check_fk(empty, fk));
}

TEST_CASE("check_fk skips rows with null source values") {
    auto db = nodes_edges("s\n1\n");
    db.tables.at("E").rows.push_back({Value{}, Value{int64_t{1}}});
    CHECK(check_fk(db, edge_fk("s")));
}

TEST_CASE("check_fk is monotone under src row deletion") {
    auto db = nodes_edges("s\n1\n2\n1");
    ForeignKey fk = edge_fk("s");
    REQUIRE(check_fk(db, fk));
    while (!db.tables.at("E").rows.empty()) {
        db.tables.at("E").rows.pop_back();
        CHECK(check_fk(db, fk));
    }
}

TEST_CASE("classify_relationship follows the key flags") {
    ForeignKey fk;
    fk.src_is_key = true;
    fk.dst_is_key = true;
    CHECK(classify_relationship(fk) == Relationship::OneToOne);
    fk.src_is_key = false;
    CHECK(classify_relationship(fk) == Relationship::ManyToOne);
    fk.dst_is_key = false;
    CHECK(classify_relationship(fk) == Relationship::General);
}

TEST_CASE("add_constraint fills key flags and verifies the instance") {
    auto db = nodes_edges("s,t\n1,2\n2,1");
    db.add_constraint(edge_fk("s"));
    const auto& fk = db.constraints.at("C1");
    CHECK(fk.dst_is_key);
    CHECK_FALSE(fk.src_is_key);
    CHECK(classify_relationship(fk) == Relationship::ManyToOne);

    auto bad = nodes_edges("s,t\n9,9");
    CHECK_THROWS_AS(bad.add_constraint(edge_fk("s")), Error);
}

TEST_CASE("active_domain sorts and dedups non-nulls") {
    Table t = load_table("[{\"v\":3},{\"v\":1},{\"v\":3},{\"v\":null}]", "T");
    auto dom = active_domain(t, "v");
    REQUIRE(dom.size() == 2);
    CHECK(std::get<int64_t>(dom[0]) == 1);
    CHECK(std::get<int64_t>(dom[1]) == 3);

    Table e = load_table("v\n", "E");
    CHECK(active_domain(e, "v").empty());

    Table s = load_table("v\nb\na", "S");
    auto sdom = active_domain(s, "v");
    CHECK(std::get<std::string>(sdom[0]) == "a");
    CHECK(std::get<std::string>(sdom[1]) == "b");
    CHECK(sdom.size() <= s.rows.size());
}

TEST_CASE("value ordering and equality coerce numerics") {
    CHECK(value_equals(Value{int64_t{1}}, Value{1.0}));
    CHECK_FALSE(value_equals(Value{int64_t{1}}, Value{std::string("1")}));
    CHECK(value_less(Value{int64_t{1}}, Value{2.5}));
    CHECK(value_less(Value{false}, Value{true}));
    CHECK(value_less(Value{}, Value{int64_t{0}}));
}
