#include "dvl/dataprep.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace dvl {

namespace {

using json = nlohmann::json;

std::string sql_ident(const std::string& ident) { return "\"" + ident + "\""; }

/// Groups row indices by the projection onto idx, first-occurrence order.
std::vector<std::pair<Row, std::vector<size_t>>> group_rows(const Table& t,
                                                            const std::vector<int>& idx) {
    std::vector<std::pair<Row, std::vector<size_t>>> groups;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        Row key;
        for (int i : idx) key.push_back(t.rows[r][i]);
        bool found = false;
        for (auto& [gkey, members] : groups) {
            bool eq = true;
            for (size_t k = 0; k < key.size(); ++k)
                if (!value_equals(gkey[k], key[k])) { eq = false; break; }
            if (eq) {
                members.push_back(r);
                found = true;
                break;
            }
        }
        if (!found) groups.push_back({std::move(key), {r}});
    }
    return groups;
}

Value compute_agg(const Table& t, const std::vector<size_t>& members, const AggExpr& agg) {
    if (agg.op == AggOp::Count) return static_cast<int64_t>(members.size());
    int idx = t.schema.require_index(agg.attr);
    TypeKind kind = t.schema.attributes[idx].type.kind;
    if (agg.op != AggOp::Min && agg.op != AggOp::Max &&
        kind != TypeKind::Integer && kind != TypeKind::Real)
        throw Error("aggregate " + agg_name(agg.op) + " requires a numeric attribute, got '" +
                    agg.attr + "' (" + type_name(kind) + ")");

    bool any = false;
    int64_t isum = 0;
    double dsum = 0;
    size_t n = 0;
    Value best;
    for (size_t r : members) {
        const Value& v = t.rows[r][idx];
        if (is_null(v)) continue;
        if (!any) best = v;
        any = true;
        ++n;
        if (auto num = as_number(v)) {
            dsum += *num;
            if (auto* i = std::get_if<int64_t>(&v)) isum += *i;
        }
        if (agg.op == AggOp::Min && value_less(v, best)) best = v;
        if (agg.op == AggOp::Max && value_less(best, v)) best = v;
    }
    if (!any) return Value{};
    switch (agg.op) {
        case AggOp::Sum: return kind == TypeKind::Integer ? Value{isum} : Value{dsum};
        case AggOp::Avg: return dsum / static_cast<double>(n);
        case AggOp::Min:
        case AggOp::Max: return best;
        default: return Value{};
    }
}

TypeKind agg_result_kind(const Table& t, const AggExpr& agg) {
    if (agg.op == AggOp::Count) return TypeKind::Integer;
    TypeKind in = t.schema.attributes[t.schema.require_index(agg.attr)].type.kind;
    if (agg.op == AggOp::Avg) return TypeKind::Real;
    return in;
}

/// Re-registers input constraints whose source columns survive (same names)
/// on the produced table.
void propagate_constraints(Database& db, const std::string& input, const std::string& out,
                           const std::vector<std::string>& surviving) {
    std::set<std::string> cols(surviving.begin(), surviving.end());
    std::vector<ForeignKey> inherited;
    for (const auto& [name, fk] : db.constraints) {
        if (fk.src_table != input || fk.dst_table == input) continue;
        bool all = std::all_of(fk.src_attrs.begin(), fk.src_attrs.end(),
                               [&](const std::string& a) { return cols.count(a) > 0; });
        if (!all) continue;
        ForeignKey nfk = fk;
        nfk.name = name + "__" + out;
        nfk.src_table = out;
        inherited.push_back(std::move(nfk));
    }
    for (auto& fk : inherited) db.add_constraint(std::move(fk));
}

TypeKind infer_value_kind(const std::vector<Value>& vals) {
    bool all_int = true, all_real = true, all_bool = true, any = false;
    for (const auto& v : vals) {
        if (is_null(v)) continue;
        any = true;
        if (!std::holds_alternative<int64_t>(v)) all_int = false;
        if (!as_number(v)) all_real = false;
        if (!std::holds_alternative<bool>(v)) all_bool = false;
    }
    if (!any) return TypeKind::Text;
    if (all_bool) return TypeKind::Boolean;
    if (all_int) return TypeKind::Integer;
    if (all_real) return TypeKind::Real;
    return TypeKind::Text;
}

} // namespace

AggOp agg_from_name(const std::string& name) {
    if (name == "count") return AggOp::Count;
    if (name == "sum") return AggOp::Sum;
    if (name == "avg") return AggOp::Avg;
    if (name == "min") return AggOp::Min;
    if (name == "max") return AggOp::Max;
    throw Error("unknown aggregate '" + name + "'");
}

std::string agg_name(AggOp op) {
    switch (op) {
        case AggOp::Count: return "count";
        case AggOp::Sum: return "sum";
        case AggOp::Avg: return "avg";
        case AggOp::Min: return "min";
        case AggOp::Max: return "max";
    }
    return "count";
}

// ---- operations -------------------------------------------------------------

NormalizeResult normalize(Database& db, const std::string& table,
                          const std::vector<std::string>& attrs,
                          const std::string& dim_name, const std::string& fact_name) {
    if (attrs.empty()) throw Error("normalize: attribute list is empty");
    const Table& in = db.table(table);
    if (db.has_table(dim_name)) throw Error("normalize: table '" + dim_name + "' already exists");
    if (db.has_table(fact_name)) throw Error("normalize: table '" + fact_name + "' already exists");

    std::vector<int> idx;
    for (const auto& a : attrs) idx.push_back(in.schema.require_index(a));
    auto groups = group_rows(in, idx);

    Table dim;
    dim.schema.table_name = dim_name;
    dim.schema.attributes.push_back({"id", {TypeKind::Integer}});
    for (int i : idx) dim.schema.attributes.push_back(in.schema.attributes[i]);
    dim.schema.primary_key = {"id"};
    dim.declared_keys = {{"id"}};
    std::vector<int64_t> row_to_dim(in.rows.size());
    for (size_t g = 0; g < groups.size(); ++g) {
        Row r;
        r.push_back(static_cast<int64_t>(g));
        for (const Value& v : groups[g].first) r.push_back(v);
        dim.rows.push_back(std::move(r));
        for (size_t m : groups[g].second) row_to_dim[m] = static_cast<int64_t>(g);
    }

    std::string ref_col = dim_name + "_id";
    if (in.schema.has_attribute(ref_col))
        throw Error("normalize: reference column '" + ref_col + "' collides with an existing attribute");

    Table fact;
    fact.schema.table_name = fact_name;
    std::set<int> removed(idx.begin(), idx.end());
    int first_removed = *std::min_element(idx.begin(), idx.end());
    std::vector<std::string> surviving;
    std::vector<int> keep; // source column index, or -1 for the reference column
    for (int c = 0; c < static_cast<int>(in.schema.attributes.size()); ++c) {
        if (c == first_removed) {
            fact.schema.attributes.push_back({ref_col, {TypeKind::Integer}});
            keep.push_back(-1);
        }
        if (removed.count(c)) continue;
        fact.schema.attributes.push_back(in.schema.attributes[c]);
        surviving.push_back(in.schema.attributes[c].name);
        keep.push_back(c);
    }
    for (size_t r = 0; r < in.rows.size(); ++r) {
        Row row;
        for (int c : keep)
            row.push_back(c < 0 ? Value{row_to_dim[r]} : in.rows[r][c]);
        fact.rows.push_back(std::move(row));
    }
    // Keys whose columns were untouched still hold on the fact table.
    for (const auto& key : in.declared_keys) {
        bool all = std::all_of(key.begin(), key.end(), [&](const std::string& a) {
            return std::find(surviving.begin(), surviving.end(), a) != surviving.end();
        });
        if (all) fact.declared_keys.push_back(key);
    }
    if (fact.declared_keys.empty()) {
        fact.schema.attributes.push_back({"id", {TypeKind::Integer}});
        for (size_t r = 0; r < fact.rows.size(); ++r)
            fact.rows[r].push_back(static_cast<int64_t>(r));
        fact.declared_keys = {{"id"}};
    }
    fact.schema.primary_key = fact.declared_keys.front();

    db.add_table(std::move(dim));
    db.add_table(std::move(fact));
    propagate_constraints(db, table, fact_name, surviving);

    ForeignKey fk;
    fk.name = "fk_" + fact_name + "_" + dim_name;
    fk.src_table = fact_name;
    fk.src_attrs = {ref_col};
    fk.dst_table = dim_name;
    fk.dst_attrs = {"id"};
    db.add_constraint(fk);
    return {dim_name, fact_name, fk.name};
}

std::vector<NormalizeResult> normalize_many(Database& db, const std::string& table,
                                            const std::vector<std::vector<std::string>>& groups,
                                            const std::vector<std::string>& dim_names,
                                            const std::string& fact_name) {
    std::set<std::string> seen;
    for (const auto& g : groups)
        for (const auto& a : g)
            if (!seen.insert(a).second) throw Error("normalize_many: attribute '" + a + "' appears in two groups");

    std::vector<NormalizeResult> results;
    std::string current = table;
    for (size_t i = 0; i < groups.size(); ++i) {
        std::string dim = i < dim_names.size() ? dim_names[i] : groups[i].front() + "_dim";
        bool last = i + 1 == groups.size();
        std::string fact = last ? fact_name : fact_name + "__tmp" + std::to_string(i);
        results.push_back(normalize(db, current, groups[i], dim, fact));
        if (current != table) db.drop_table(current);
        current = fact;
    }
    return results;
}

std::vector<std::string> hier(Database& db, const std::string& table,
                              const std::vector<std::string>& hierarchy,
                              const std::vector<std::vector<AggExpr>>& level_aggs,
                              const std::vector<std::string>& names) {
    if (hierarchy.empty()) throw Error("hier: hierarchy is empty");
    const Table in = db.table(table); // copy: db mutates below
    std::vector<std::string> produced;
    for (size_t k = 1; k <= hierarchy.size(); ++k) {
        std::vector<std::string> prefix(hierarchy.begin(), hierarchy.begin() + k);
        std::string name = k - 1 < names.size() ? names[k - 1]
                                                : table + "_l" + std::to_string(k);
        std::vector<AggExpr> aggs =
            k - 1 < level_aggs.size() ? level_aggs[k - 1] : std::vector<AggExpr>{};

        std::vector<int> idx;
        for (const auto& a : prefix) idx.push_back(in.schema.require_index(a));
        auto groups = group_rows(in, idx);

        Table out;
        out.schema.table_name = name;
        for (int i : idx) out.schema.attributes.push_back(in.schema.attributes[i]);
        for (const auto& agg : aggs)
            out.schema.attributes.push_back({agg.alias, {agg_result_kind(in, agg)}});
        out.schema.primary_key = prefix;
        out.declared_keys = {prefix};
        for (const auto& [key, members] : groups) {
            Row row = key;
            for (const auto& agg : aggs) row.push_back(compute_agg(in, members, agg));
            out.rows.push_back(std::move(row));
        }
        db.add_table(std::move(out));
        if (k > 1) {
            ForeignKey fk;
            fk.name = "fk_" + name + "_" + produced.back();
            fk.src_table = name;
            fk.src_attrs = std::vector<std::string>(hierarchy.begin(), hierarchy.begin() + k - 1);
            fk.dst_table = produced.back();
            fk.dst_attrs = fk.src_attrs;
            db.add_constraint(fk);
        }
        produced.push_back(name);
    }
    return produced;
}

std::string groupby(Database& db, const std::string& table, const std::string& out,
                    const std::vector<std::string>& keys, const std::vector<AggExpr>& aggs) {
    const Table& in = db.table(table);
    std::vector<int> idx;
    for (const auto& a : keys) idx.push_back(in.schema.require_index(a));
    auto groups = group_rows(in, idx);

    Table result;
    result.schema.table_name = out;
    for (int i : idx) result.schema.attributes.push_back(in.schema.attributes[i]);
    for (const auto& agg : aggs)
        result.schema.attributes.push_back({agg.alias, {agg_result_kind(in, agg)}});
    result.schema.primary_key = keys;
    result.declared_keys = {keys};
    for (const auto& [key, members] : groups) {
        Row row = key;
        for (const auto& agg : aggs) row.push_back(compute_agg(in, members, agg));
        result.rows.push_back(std::move(row));
    }
    db.add_table(std::move(result));
    propagate_constraints(db, table, out, keys);
    return out;
}

std::string select(Database& db, const std::string& table, const std::string& out,
                   const std::vector<std::pair<std::string, std::string>>& projections) {
    const Table& in = db.table(table);
    struct Col {
        std::string name;
        int src = -1;            // direct copy when >= 0
        std::optional<Expr> expr;
    };
    std::vector<Col> cols;
    for (const auto& [alias, text] : projections) {
        if (alias == "*" && text == "*") {
            for (size_t c = 0; c < in.schema.attributes.size(); ++c)
                cols.push_back({in.schema.attributes[c].name, static_cast<int>(c), {}});
            continue;
        }
        Expr e = Expr::parse(text);
        for (const auto& ref : e.references()) in.schema.require_index(ref);
        if (auto col = e.as_column())
            cols.push_back({alias, in.schema.index_of(*col), {}});
        else
            cols.push_back({alias, -1, std::move(e)});
    }
    std::set<std::string> names;
    for (const auto& c : cols)
        if (!names.insert(c.name).second)
            throw Error("select: duplicate output column '" + c.name + "'");

    Table result;
    result.schema.table_name = out;
    std::vector<std::vector<Value>> derived(cols.size());
    for (size_t ci = 0; ci < cols.size(); ++ci) {
        if (cols[ci].src >= 0) continue;
        for (const auto& row : in.rows) {
            derived[ci].push_back(cols[ci].expr->eval([&](const std::string& name) -> std::optional<Value> {
                int i = in.schema.index_of(name);
                if (i < 0) return std::nullopt;
                return row[i];
            }));
        }
    }
    for (size_t ci = 0; ci < cols.size(); ++ci) {
        AttributeType type = cols[ci].src >= 0 ? in.schema.attributes[cols[ci].src].type
                                               : AttributeType{infer_value_kind(derived[ci])};
        result.schema.attributes.push_back({cols[ci].name, type});
    }
    for (size_t r = 0; r < in.rows.size(); ++r) {
        Row row;
        for (size_t ci = 0; ci < cols.size(); ++ci)
            row.push_back(cols[ci].src >= 0 ? in.rows[r][cols[ci].src] : derived[ci][r]);
        result.rows.push_back(std::move(row));
    }
    std::vector<std::string> surviving;
    for (const auto& c : cols)
        if (c.src >= 0 && in.schema.attributes[c.src].name == c.name) surviving.push_back(c.name);
    for (const auto& key : in.declared_keys) {
        bool all = std::all_of(key.begin(), key.end(), [&](const std::string& a) {
            return std::find(surviving.begin(), surviving.end(), a) != surviving.end();
        });
        if (all) result.declared_keys.push_back(key);
    }
    if (!result.declared_keys.empty()) result.schema.primary_key = result.declared_keys.front();
    db.add_table(std::move(result));
    propagate_constraints(db, table, out, surviving);
    return out;
}

std::string join(Database& db, const std::string& left, const std::string& right,
                 const std::string& out,
                 const std::vector<std::pair<std::string, std::string>>& on,
                 const std::vector<std::pair<std::string, std::string>>& projections) {
    const Table& L = db.table(left);
    const Table& R = db.table(right);
    std::vector<int> lidx, ridx;
    std::vector<std::string> ron;
    for (const auto& [la, ra] : on) {
        lidx.push_back(L.schema.require_index(la));
        ridx.push_back(R.schema.require_index(ra));
        ron.push_back(ra);
        TypeKind lk = L.schema.attributes[lidx.back()].type.kind;
        TypeKind rk = R.schema.attributes[ridx.back()].type.kind;
        if (!types_compatible(lk, rk))
            throw Error("join: incompatible types on " + la + " = " + ra);
    }

    // Name resolution: bare name if unique across inputs, else <table>_<name>.
    auto resolve = [&](const std::string& name) -> std::pair<int, int> { // (side, idx)
        int li = L.schema.index_of(name), ri = R.schema.index_of(name);
        if (li >= 0 && ri >= 0) throw Error("join: ambiguous column '" + name + "', qualify with table prefix");
        if (li >= 0) return {0, li};
        if (ri >= 0) return {1, ri};
        if (name.rfind(left + "_", 0) == 0) {
            int i = L.schema.index_of(name.substr(left.size() + 1));
            if (i >= 0) return {0, i};
        }
        if (name.rfind(right + "_", 0) == 0) {
            int i = R.schema.index_of(name.substr(right.size() + 1));
            if (i >= 0) return {1, i};
        }
        throw Error("join: unknown column '" + name + "'");
    };

    struct Col { std::string name; int side; int idx; };
    std::vector<Col> cols;
    if (projections.empty()) {
        for (size_t c = 0; c < L.schema.attributes.size(); ++c)
            cols.push_back({L.schema.attributes[c].name, 0, static_cast<int>(c)});
        for (size_t c = 0; c < R.schema.attributes.size(); ++c) {
            std::string name = R.schema.attributes[c].name;
            if (L.schema.has_attribute(name)) name = right + "_" + name;
            cols.push_back({name, 1, static_cast<int>(c)});
        }
    } else {
        for (const auto& [alias, source] : projections) {
            auto [side, idx] = resolve(source);
            cols.push_back({alias, side, idx});
        }
    }
    std::set<std::string> seen;
    for (const auto& c : cols)
        if (!seen.insert(c.name).second) throw Error("join: duplicate output column '" + c.name + "'");

    Table result;
    result.schema.table_name = out;
    for (const auto& c : cols)
        result.schema.attributes.push_back(
            {c.name, (c.side == 0 ? L : R).schema.attributes[c.idx].type});
    for (const auto& lrow : L.rows) {
        for (const auto& rrow : R.rows) {
            bool match = true;
            for (size_t k = 0; k < lidx.size(); ++k)
                if (!value_equals(lrow[lidx[k]], rrow[ridx[k]])) { match = false; break; }
            if (!match) continue;
            Row row;
            for (const auto& c : cols) row.push_back(c.side == 0 ? lrow[c.idx] : rrow[c.idx]);
            result.rows.push_back(std::move(row));
        }
    }
    // An N-1 join keeps the left key a key of the output.
    std::vector<std::string> left_surviving;
    for (const auto& c : cols)
        if (c.side == 0 && L.schema.attributes[c.idx].name == c.name)
            left_surviving.push_back(c.name);
    if (R.is_declared_key(ron)) {
        for (const auto& key : L.declared_keys) {
            bool all = std::all_of(key.begin(), key.end(), [&](const std::string& a) {
                return std::find(left_surviving.begin(), left_surviving.end(), a) != left_surviving.end();
            });
            if (all) result.declared_keys.push_back(key);
        }
    }
    if (result.declared_keys.empty()) {
        result.schema.attributes.push_back({"id", {TypeKind::Integer}});
        for (size_t r = 0; r < result.rows.size(); ++r)
            result.rows[r].push_back(static_cast<int64_t>(r));
        result.declared_keys = {{"id"}};
    }
    result.schema.primary_key = result.declared_keys.front();
    db.add_table(std::move(result));
    propagate_constraints(db, left, out, left_surviving);
    return out;
}

void apply_plan(Database& db, const TransformPlan& plan) {
    for (const auto& s : plan.steps) {
        switch (s.op) {
            case TransformStep::Op::Normalize:
                normalize(db, s.table, s.attrs, s.names.at(0), s.out);
                break;
            case TransformStep::Op::NormalizeMany:
                normalize_many(db, s.table, s.groups, s.names, s.out);
                break;
            case TransformStep::Op::Hier:
                hier(db, s.table, s.attrs, s.level_aggs, s.names);
                break;
            case TransformStep::Op::GroupBy:
                groupby(db, s.table, s.out, s.attrs, s.aggs);
                break;
            case TransformStep::Op::Select:
                select(db, s.table, s.out, s.projections);
                break;
            case TransformStep::Op::Join:
                join(db, s.table, s.right, s.out, s.on, s.projections);
                break;
            case TransformStep::Op::Drop:
                db.drop_table(s.table);
                break;
        }
    }
}

// ---- plan (de)serialization ---------------------------------------------------

namespace {

AggExpr agg_from_json(const json& j) {
    AggExpr a;
    a.op = agg_from_name(j.at("op").get<std::string>());
    if (j.contains("attr")) a.attr = j.at("attr").get<std::string>();
    a.alias = j.at("as").get<std::string>();
    if (a.op != AggOp::Count && a.attr.empty())
        throw Error("aggregate " + agg_name(a.op) + " requires an attr");
    return a;
}

json agg_to_json(const AggExpr& a) {
    json j;
    j["op"] = agg_name(a.op);
    if (!a.attr.empty()) j["attr"] = a.attr;
    j["as"] = a.alias;
    return j;
}

std::vector<std::pair<std::string, std::string>> pairs_from_json(const json& j) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2)
            throw Error("plan: expected a [a, b] pair, got " + p.dump());
        out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    return out;
}

} // namespace

TransformPlan TransformPlan::from_json(const std::string& text) {
    json j = json::parse(text);
    TransformPlan plan;
    for (const auto& js : j.at("steps")) {
        TransformStep s;
        std::string op = js.at("op").get<std::string>();
        if (op == "normalize") {
            s.op = TransformStep::Op::Normalize;
            s.table = js.at("table");
            s.attrs = js.at("attrs").get<std::vector<std::string>>();
            s.names = {js.at("dim").get<std::string>()};
            s.out = js.at("fact");
        } else if (op == "normalize_many") {
            s.op = TransformStep::Op::NormalizeMany;
            s.table = js.at("table");
            s.groups = js.at("groups").get<std::vector<std::vector<std::string>>>();
            if (js.contains("dims")) s.names = js.at("dims").get<std::vector<std::string>>();
            s.out = js.at("fact");
        } else if (op == "hier") {
            s.op = TransformStep::Op::Hier;
            s.table = js.at("table");
            s.attrs = js.at("hierarchy").get<std::vector<std::string>>();
            if (js.contains("names")) s.names = js.at("names").get<std::vector<std::string>>();
            if (js.contains("aggs"))
                for (const auto& level : js.at("aggs")) {
                    std::vector<AggExpr> aggs;
                    for (const auto& a : level) aggs.push_back(agg_from_json(a));
                    s.level_aggs.push_back(std::move(aggs));
                }
        } else if (op == "groupby") {
            s.op = TransformStep::Op::GroupBy;
            s.table = js.at("table");
            s.out = js.at("as");
            s.attrs = js.at("keys").get<std::vector<std::string>>();
            if (js.contains("aggs"))
                for (const auto& a : js.at("aggs")) s.aggs.push_back(agg_from_json(a));
        } else if (op == "select") {
            s.op = TransformStep::Op::Select;
            s.table = js.at("table");
            s.out = js.at("as");
            s.projections = pairs_from_json(js.at("projections"));
        } else if (op == "join") {
            s.op = TransformStep::Op::Join;
            s.table = js.at("left");
            s.right = js.at("right");
            s.out = js.at("as");
            s.on = pairs_from_json(js.at("on"));
            if (js.contains("projections")) s.projections = pairs_from_json(js.at("projections"));
        } else if (op == "drop") {
            s.op = TransformStep::Op::Drop;
            s.table = js.at("table");
        } else {
            throw Error("plan: unknown step op '" + op + "'");
        }
        plan.steps.push_back(std::move(s));
    }
    return plan;
}

std::string TransformPlan::to_json() const {
    json steps = json::array();
    for (const auto& s : this->steps) {
        json js;
        switch (s.op) {
            case TransformStep::Op::Normalize:
                js["op"] = "normalize";
                js["table"] = s.table;
                js["attrs"] = s.attrs;
                js["dim"] = s.names.at(0);
                js["fact"] = s.out;
                break;
            case TransformStep::Op::NormalizeMany:
                js["op"] = "normalize_many";
                js["table"] = s.table;
                js["groups"] = s.groups;
                if (!s.names.empty()) js["dims"] = s.names;
                js["fact"] = s.out;
                break;
            case TransformStep::Op::Hier: {
                js["op"] = "hier";
                js["table"] = s.table;
                js["hierarchy"] = s.attrs;
                if (!s.names.empty()) js["names"] = s.names;
                json levels = json::array();
                for (const auto& level : s.level_aggs) {
                    json la = json::array();
                    for (const auto& a : level) la.push_back(agg_to_json(a));
                    levels.push_back(la);
                }
                if (!levels.empty()) js["aggs"] = levels;
                break;
            }
            case TransformStep::Op::GroupBy: {
                js["op"] = "groupby";
                js["table"] = s.table;
                js["as"] = s.out;
                js["keys"] = s.attrs;
                json aggs = json::array();
                for (const auto& a : s.aggs) aggs.push_back(agg_to_json(a));
                if (!aggs.empty()) js["aggs"] = aggs;
                break;
            }
            case TransformStep::Op::Select:
                js["op"] = "select";
                js["table"] = s.table;
                js["as"] = s.out;
                js["projections"] = s.projections;
                break;
            case TransformStep::Op::Join:
                js["op"] = "join";
                js["left"] = s.table;
                js["right"] = s.right;
                js["as"] = s.out;
                js["on"] = s.on;
                if (!s.projections.empty()) js["projections"] = s.projections;
                break;
            case TransformStep::Op::Drop:
                js["op"] = "drop";
                js["table"] = s.table;
                break;
        }
        steps.push_back(std::move(js));
    }
    json j;
    j["steps"] = std::move(steps);
    return j.dump(2);
}

// ---- SQL emission ------------------------------------------------------------

namespace {

std::string sql_agg(const AggExpr& a) {
    std::string fn;
    switch (a.op) {
        case AggOp::Count: return "COUNT(*) AS " + sql_ident(a.alias);
        case AggOp::Sum: fn = "SUM"; break;
        case AggOp::Avg: fn = "AVG"; break;
        case AggOp::Min: fn = "MIN"; break;
        case AggOp::Max: fn = "MAX"; break;
    }
    return fn + "(" + sql_ident(a.attr) + ") AS " + sql_ident(a.alias);
}

std::string join_list(const std::vector<std::string>& parts, const std::string& sep = ", ") {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

/// Copy with all rows removed; constraints hold vacuously, so the emitter can
/// evolve schemas by replaying the plan's steps.
Database schema_only(const Database& db) {
    Database sim;
    for (const auto& [name, t] : db.tables) {
        Table copy;
        copy.schema = t.schema;
        copy.declared_keys = t.declared_keys;
        sim.tables.emplace(name, std::move(copy));
    }
    for (const auto& [name, fk] : db.constraints) sim.constraints.emplace(name, fk);
    return sim;
}

void emit_normalize(std::vector<std::string>& out, Database& sim, const std::string& table,
                    const std::vector<std::string>& attrs, const std::string& dim,
                    const std::string& fact) {
    const Table input = sim.table(table); // copy; sim mutates below
    normalize(sim, table, attrs, dim, fact);

    std::vector<std::string> cols, conds;
    for (const auto& a : attrs) {
        cols.push_back(sql_ident(a));
        conds.push_back("src." + sql_ident(a) + " IS dim." + sql_ident(a));
    }
    out.push_back("CREATE TABLE " + sql_ident(dim) +
                  " AS SELECT ROW_NUMBER() OVER (ORDER BY MIN(_rowid_)) - 1 AS \"id\", " +
                  join_list(cols) + " FROM " + sql_ident(table) + " GROUP BY " + join_list(cols) + ";");

    std::vector<std::string> items;
    for (const auto& attr : sim.table(fact).schema.attributes) {
        if (attr.name == dim + "_id")
            items.push_back("dim.\"id\" AS " + sql_ident(attr.name));
        else if (input.schema.has_attribute(attr.name))
            items.push_back("src." + sql_ident(attr.name) + " AS " + sql_ident(attr.name));
        else // synthesized key
            items.push_back("ROW_NUMBER() OVER (ORDER BY src._rowid_) - 1 AS " + sql_ident(attr.name));
    }
    out.push_back("CREATE TABLE " + sql_ident(fact) + " AS SELECT " + join_list(items) + " FROM " +
                  sql_ident(table) + " AS src JOIN " + sql_ident(dim) + " AS dim ON " +
                  join_list(conds, " AND ") + " ORDER BY src._rowid_;");
}

void emit_join(std::vector<std::string>& out, Database& sim, const TransformStep& s) {
    const Table left = sim.table(s.table);
    const Table right = sim.table(s.right);
    join(sim, s.table, s.right, s.out, s.on, s.projections);

    auto side_of = [&](const std::string& name) -> std::pair<char, std::string> {
        bool in_left = left.schema.has_attribute(name);
        bool in_right = right.schema.has_attribute(name);
        if (in_left && in_right)
            throw Error("emit_sql: ambiguous column '" + name + "'");
        if (in_left) return {'l', name};
        if (in_right) return {'r', name};
        if (name.rfind(s.table + "_", 0) == 0 &&
            left.schema.has_attribute(name.substr(s.table.size() + 1)))
            return {'l', name.substr(s.table.size() + 1)};
        if (name.rfind(s.right + "_", 0) == 0 &&
            right.schema.has_attribute(name.substr(s.right.size() + 1)))
            return {'r', name.substr(s.right.size() + 1)};
        throw Error("emit_sql: unknown column '" + name + "'");
    };

    std::vector<std::string> items;
    if (s.projections.empty()) {
        for (const auto& attr : left.schema.attributes)
            items.push_back("l." + sql_ident(attr.name) + " AS " + sql_ident(attr.name));
        for (const auto& attr : right.schema.attributes) {
            std::string name = attr.name;
            if (left.schema.has_attribute(name)) name = s.right + "_" + name;
            items.push_back("r." + sql_ident(attr.name) + " AS " + sql_ident(name));
        }
    } else {
        for (const auto& [alias, source] : s.projections) {
            auto [side, col] = side_of(source);
            items.push_back(std::string(1, side) + "." + sql_ident(col) + " AS " + sql_ident(alias));
        }
    }
    // A synthesized key shows up in the simulated output but not in the items.
    const Table& produced = sim.table(s.out);
    if (produced.schema.attributes.size() == items.size() + 1 &&
        produced.schema.attributes.back().name == "id")
        items.push_back("ROW_NUMBER() OVER (ORDER BY l._rowid_, r._rowid_) - 1 AS \"id\"");

    std::vector<std::string> conds;
    for (const auto& [la, ra] : s.on)
        conds.push_back("l." + sql_ident(la) + " IS r." + sql_ident(ra));
    out.push_back("CREATE TABLE " + sql_ident(s.out) + " AS SELECT " + join_list(items) + " FROM " +
                  sql_ident(s.table) + " AS l JOIN " + sql_ident(s.right) + " AS r ON " +
                  join_list(conds, " AND ") + " ORDER BY l._rowid_, r._rowid_;");
}

} // namespace

std::vector<std::string> emit_sql(const Database& db, const TransformPlan& plan) {
    Database sim = schema_only(db);
    std::vector<std::string> out;
    for (const auto& s : plan.steps) {
        switch (s.op) {
            case TransformStep::Op::Normalize:
                emit_normalize(out, sim, s.table, s.attrs, s.names.at(0), s.out);
                break;
            case TransformStep::Op::NormalizeMany: {
                std::string current = s.table;
                for (size_t i = 0; i < s.groups.size(); ++i) {
                    std::string dim = i < s.names.size() ? s.names[i] : s.groups[i].front() + "_dim";
                    bool last = i + 1 == s.groups.size();
                    std::string fact = last ? s.out : s.out + "__tmp" + std::to_string(i);
                    emit_normalize(out, sim, current, s.groups[i], dim, fact);
                    if (current != s.table) {
                        sim.drop_table(current);
                        out.push_back("DROP TABLE " + sql_ident(current) + ";");
                    }
                    current = fact;
                }
                break;
            }
            case TransformStep::Op::Hier: {
                const Table input = sim.table(s.table);
                hier(sim, s.table, s.attrs, s.level_aggs, s.names);
                for (size_t k = 1; k <= s.attrs.size(); ++k) {
                    std::string name = k - 1 < s.names.size() ? s.names[k - 1]
                                                              : s.table + "_l" + std::to_string(k);
                    std::vector<std::string> cols;
                    for (size_t i = 0; i < k; ++i) cols.push_back(sql_ident(s.attrs[i]));
                    std::vector<std::string> items = cols;
                    if (k - 1 < s.level_aggs.size())
                        for (const auto& a : s.level_aggs[k - 1]) items.push_back(sql_agg(a));
                    out.push_back("CREATE TABLE " + sql_ident(name) + " AS SELECT " +
                                  join_list(items) + " FROM " + sql_ident(s.table) + " GROUP BY " +
                                  join_list(cols) + " ORDER BY MIN(_rowid_);");
                }
                break;
            }
            case TransformStep::Op::GroupBy: {
                groupby(sim, s.table, s.out, s.attrs, s.aggs);
                std::vector<std::string> cols;
                for (const auto& k : s.attrs) cols.push_back(sql_ident(k));
                std::vector<std::string> items = cols;
                for (const auto& a : s.aggs) items.push_back(sql_agg(a));
                out.push_back("CREATE TABLE " + sql_ident(s.out) + " AS SELECT " + join_list(items) +
                              " FROM " + sql_ident(s.table) + " GROUP BY " + join_list(cols) +
                              " ORDER BY MIN(_rowid_);");
                break;
            }
            case TransformStep::Op::Select: {
                select(sim, s.table, s.out, s.projections);
                std::vector<std::string> items;
                for (const auto& [alias, text] : s.projections) {
                    if (alias == "*" && text == "*") {
                        items.push_back("*");
                        continue;
                    }
                    items.push_back(Expr::parse(text).to_sql() + " AS " + sql_ident(alias));
                }
                out.push_back("CREATE TABLE " + sql_ident(s.out) + " AS SELECT " + join_list(items) +
                              " FROM " + sql_ident(s.table) + " ORDER BY _rowid_;");
                break;
            }
            case TransformStep::Op::Join:
                emit_join(out, sim, s);
                break;
            case TransformStep::Op::Drop:
                sim.drop_table(s.table);
                out.push_back("DROP TABLE " + sql_ident(s.table) + ";");
                break;
        }
    }
    return out;
}

} // namespace dvl
