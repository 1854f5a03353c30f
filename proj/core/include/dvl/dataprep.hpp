#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dvl/expr.hpp"
#include "dvl/relcore.hpp"

namespace dvl {

enum class AggOp { Count, Sum, Avg, Min, Max };

struct AggExpr {
    AggOp op = AggOp::Count;
    std::string attr;  // unused for count
    std::string alias;
};

AggOp agg_from_name(const std::string& name);
std::string agg_name(AggOp op);

/// One step of a preparation plan. `op` selects which fields apply.
struct TransformStep {
    enum class Op { Normalize, NormalizeMany, Hier, GroupBy, Select, Join, Drop };
    Op op;

    std::string table;                      // input table (left input for join)
    std::string right;                      // join only
    std::string out;                        // produced table (fact table for normalize)
    std::vector<std::string> attrs;         // normalize attrs / groupby keys / hier hierarchy
    std::vector<std::vector<std::string>> groups;   // normalize_many
    std::vector<std::string> names;         // dim names / hier level names
    std::vector<AggExpr> aggs;              // groupby
    std::vector<std::vector<AggExpr>> level_aggs;   // hier, one list per level
    std::vector<std::pair<std::string, std::string>> projections; // select: (alias, expr); join
    std::vector<std::pair<std::string, std::string>> on;          // join: (left attr, right attr)
};

struct TransformPlan {
    std::vector<TransformStep> steps;

    static TransformPlan from_json(const std::string& text);
    std::string to_json() const;
};

struct NormalizeResult {
    std::string dim;
    std::string fact;
    std::string fk;
};

// Each operation registers its outputs (and any produced constraints) in db.
// Constraints of the input whose columns survive are re-registered on the
// output under derived names.

NormalizeResult normalize(Database& db, const std::string& table,
                          const std::vector<std::string>& attrs,
                          const std::string& dim_name, const std::string& fact_name);

std::vector<NormalizeResult> normalize_many(Database& db, const std::string& table,
                                            const std::vector<std::vector<std::string>>& groups,
                                            const std::vector<std::string>& dim_names,
                                            const std::string& fact_name);

/// One table per hierarchy prefix, keyed by the prefix, carrying that
/// level's aggregates; consecutive levels are linked by foreign keys.
std::vector<std::string> hier(Database& db, const std::string& table,
                              const std::vector<std::string>& hierarchy,
                              const std::vector<std::vector<AggExpr>>& level_aggs,
                              const std::vector<std::string>& names = {});

std::string groupby(Database& db, const std::string& table, const std::string& out,
                    const std::vector<std::string>& keys, const std::vector<AggExpr>& aggs);

/// Projection with derived attributes. The pair ("*","*") keeps all input
/// columns at that position.
std::string select(Database& db, const std::string& table, const std::string& out,
                   const std::vector<std::pair<std::string, std::string>>& projections);

std::string join(Database& db, const std::string& left, const std::string& right,
                 const std::string& out,
                 const std::vector<std::pair<std::string, std::string>>& on,
                 const std::vector<std::pair<std::string, std::string>>& projections);

/// Runs every step in order against db.
void apply_plan(Database& db, const TransformPlan& plan);

/// CREATE TABLE ... AS SELECT statements, one per produced table, that
/// reproduce apply_plan on a SQL engine (sqlite-compatible generic dialect;
/// first-occurrence ids rely on _rowid_ ordering). `db` is the database the
/// plan will run against; only schemas are consulted.
std::vector<std::string> emit_sql(const Database& db, const TransformPlan& plan);

} // namespace dvl
