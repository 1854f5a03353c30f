#include "dvl/resolver.hpp"

#include <algorithm>

#include "dvl/expr.hpp"

namespace dvl {

namespace {

/// Source-side attributes of a hop: the attributes of the table the hop
/// leaves from.
const std::vector<std::string>& hop_source_attrs(const Database& db, const FkHop& hop) {
    const ForeignKey& fk = db.constraints.at(hop.constraint);
    return hop.forward ? fk.src_attrs : fk.dst_attrs;
}

std::string hop_from(const Database& db, const FkHop& hop) {
    const ForeignKey& fk = db.constraints.at(hop.constraint);
    return hop.forward ? fk.src_table : fk.dst_table;
}

std::string hop_to(const Database& db, const FkHop& hop) {
    const ForeignKey& fk = db.constraints.at(hop.constraint);
    return hop.forward ? fk.dst_table : fk.src_table;
}

/// Hop lands on a key of its destination (row lookup is unambiguous).
bool hop_key_landing(const Database& db, const FkHop& hop) {
    const ForeignKey& fk = db.constraints.at(hop.constraint);
    return hop.forward ? fk.dst_is_key : fk.src_is_key;
}

void enumerate_from(const Database& db, const std::string& at, const std::string& to,
                    int remaining, bool key_landing_only, std::vector<FkHop>& prefix,
                    std::vector<FkPath>& out) {
    if (!prefix.empty() && at == to) {
        out.push_back({prefix.empty() ? at : hop_from(db, prefix.front()), to, prefix});
        // fall through: longer paths may revisit `to` (bounded by remaining)
    }
    if (remaining == 0) return;
    for (const auto& [name, fk] : db.constraints) {
        for (bool forward : {true, false}) {
            FkHop hop{name, forward};
            if (hop_from(db, hop) != at) continue;
            if (key_landing_only && !hop_key_landing(db, hop)) continue;
            // No immediate back-and-forth over the same constraint.
            if (!prefix.empty() && prefix.back().constraint == name &&
                prefix.back().forward != forward)
                continue;
            prefix.push_back(hop);
            enumerate_from(db, hop_to(db, hop), to, remaining - 1, key_landing_only, prefix, out);
            prefix.pop_back();
        }
    }
}

std::vector<FkPath> enumerate(const Database& db, const std::string& from, const std::string& to,
                              int max_hops, bool key_landing_only) {
    std::vector<FkHop> prefix;
    std::vector<FkPath> out;
    enumerate_from(db, from, to, max_hops, key_landing_only, prefix, out);
    for (auto& p : out) p.origin = from;
    return out;
}

} // namespace

std::vector<FkPath> enumerate_paths(const Database& db, const std::string& from,
                                    const std::string& to, int max_hops) {
    db.table(from);
    db.table(to);
    // Forward key-landing hops only; 1-1 constraints also admit the reverse
    // direction, which itself lands on a key.
    return enumerate(db, from, to, max_hops, true);
}

namespace {

struct ResolvedTarget {
    const ViewSpec* view = nullptr;
    const Table* table = nullptr;
    const MarkTable* marks = nullptr; // may be null pre-execution
};

ResolvedTarget resolve_target(const ResolveContext& ctx, const ForeignRefSpec& ref) {
    ResolvedTarget t;
    t.view = ctx.spec ? ctx.spec->find_view(ref.view) : nullptr;
    std::string table_name;
    if (t.view) {
        table_name = t.view->table;
    } else if (ctx.db->has_table(ref.view)) {
        table_name = ref.view; // a data table can be referenced directly
    } else {
        throw Error("reference target '" + ref.view + "' is neither a view nor a table");
    }
    t.table = &ctx.db->table(table_name);
    if (ctx.marks) t.marks = ctx.marks(ref.view);
    return t;
}

bool same_attr_set(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() != b.size()) return false;
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    return sa == sb;
}

/// Candidate paths whose first hop consumes exactly the filter attributes.
std::vector<FkPath> matching_paths(const Database& db, const std::string& from,
                                   const std::string& to,
                                   const std::vector<std::string>& filter_attrs,
                                   bool key_landing_only, int max_hops = 3) {
    std::vector<FkPath> all = enumerate(db, from, to, max_hops, key_landing_only);
    std::vector<FkPath> matched;
    for (auto& p : all)
        if (same_attr_set(hop_source_attrs(db, p.hops.front()), filter_attrs))
            matched.push_back(std::move(p));
    return matched;
}

/// True when the filter names a declared key of the table itself (the
/// identity path: source and target tables coincide, rows match by key).
bool identity_path_applies(const Database& db, const std::string& from, const std::string& to,
                           const std::vector<std::string>& filter_attrs) {
    return from == to && db.table(to).is_declared_key(filter_attrs);
}

/// Values a mark exposes: channels first, then its data row's attributes.
NameLookup mark_lookup(const ResolvedTarget& target, size_t row) {
    return [&target, row](const std::string& name) -> std::optional<Value> {
        if (target.marks && row < target.marks->records.size()) {
            auto it = target.marks->records[row].channels.find(name);
            if (it != target.marks->records[row].channels.end()) return it->second;
        }
        int idx = target.table->schema.index_of(name);
        if (idx >= 0) return target.table->rows[row][idx];
        return std::nullopt;
    };
}

std::vector<size_t> rows_matching(const Table& t, const std::vector<std::string>& attrs,
                                  const Row& values) {
    std::vector<int> idx;
    for (const auto& a : attrs) idx.push_back(t.schema.require_index(a));
    std::vector<size_t> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        bool ok = true;
        for (size_t k = 0; k < idx.size(); ++k)
            if (!value_equals(t.rows[r][idx[k]], values[k])) { ok = false; break; }
        if (ok) out.push_back(r);
    }
    return out;
}

/// Follows one hop from a set of rows in `from`, returning row indices in the
/// hop's destination table.
std::vector<size_t> follow_hop(const Database& db, const FkHop& hop,
                               const std::string& from_table, const std::vector<size_t>& rows) {
    const ForeignKey& fk = db.constraints.at(hop.constraint);
    const Table& from = db.table(from_table);
    const Table& to = db.table(hop.forward ? fk.dst_table : fk.src_table);
    const auto& from_attrs = hop.forward ? fk.src_attrs : fk.dst_attrs;
    const auto& to_attrs = hop.forward ? fk.dst_attrs : fk.src_attrs;
    std::vector<int> fidx;
    for (const auto& a : from_attrs) fidx.push_back(from.schema.require_index(a));
    std::vector<size_t> out;
    for (size_t r : rows) {
        Row key;
        for (int i : fidx) key.push_back(from.rows[r][i]);
        for (size_t m : rows_matching(to, to_attrs, key)) out.push_back(m);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct MatchSet {
    std::vector<size_t> rows; // row indices in the terminal table
};

MatchSet match_rows(const ResolveContext& ctx, const Table& source, size_t source_row,
                    const ForeignRefSpec& ref, const ResolvedTarget& target,
                    const std::optional<FkPath>& path, bool identity) {
    MatchSet m;
    switch (ref.filter_kind) {
        case ForeignRefSpec::Filter::All:
            for (size_t r = 0; r < target.table->rows.size(); ++r) m.rows.push_back(r);
            return m;
        case ForeignRefSpec::Filter::Predicate: {
            for (size_t r = 0; r < target.table->rows.size(); ++r) {
                auto lookup = mark_lookup(target, r);
                bool ok = true;
                for (const auto& [col, want] : ref.predicate) {
                    auto have = lookup(col);
                    if (!have || !value_equals(*have, want)) { ok = false; break; }
                }
                if (ok) m.rows.push_back(r);
            }
            return m;
        }
        case ForeignRefSpec::Filter::SourceAttrs: {
            Row key;
            for (const auto& a : ref.filter_attrs)
                key.push_back(source.rows[source_row][source.schema.require_index(a)]);
            if (identity) {
                m.rows = rows_matching(*target.table, ref.filter_attrs, key);
                return m;
            }
            if (!path) throw Error("reference without a resolved path");
            // First hop consumes the filter values; later hops chain rows.
            const ForeignKey& first = ctx.db->constraints.at(path->hops.front().constraint);
            bool fwd = path->hops.front().forward;
            const Table& next = ctx.db->table(fwd ? first.dst_table : first.src_table);
            std::vector<size_t> rows =
                rows_matching(next, fwd ? first.dst_attrs : first.src_attrs, key);
            std::string at = fwd ? first.dst_table : first.src_table;
            for (size_t h = 1; h < path->hops.size(); ++h) {
                rows = follow_hop(*ctx.db, path->hops[h], at, rows);
                at = hop_to(*ctx.db, path->hops[h]);
            }
            m.rows = std::move(rows);
            return m;
        }
    }
    return m;
}

Value reduce(const RefAgg& agg, std::vector<Value> vals) {
    if (agg.op == AggOp::Count) return static_cast<int64_t>(vals.size());
    if (vals.empty()) return Value{};
    Value best = vals[0];
    double sum = 0;
    bool all_int = true;
    int64_t isum = 0;
    for (const auto& v : vals) {
        if (auto n = as_number(v)) sum += *n;
        if (std::holds_alternative<int64_t>(v)) isum += std::get<int64_t>(v);
        else all_int = false;
        if (agg.op == AggOp::Min && value_less(v, best)) best = v;
        if (agg.op == AggOp::Max && value_less(best, v)) best = v;
    }
    switch (agg.op) {
        case AggOp::Sum: return all_int ? Value{isum} : Value{sum};
        case AggOp::Min:
        case AggOp::Max: return best;
        default: throw Error("unsupported reference reducer");
    }
}

} // namespace

PathInfo validate_ref(const ResolveContext& ctx, const ViewSpec& view, const ForeignRefSpec& ref) {
    ResolvedTarget target = resolve_target(ctx, ref);
    const std::string& from = view.table;
    const std::string& to = target.table->schema.table_name;
    PathInfo info;
    info.terminal = to;

    if (ref.filter_kind != ForeignRefSpec::Filter::SourceAttrs) {
        if (!ref.agg)
            throw Error("reference to '" + ref.view + "' must filter on source attributes or aggregate");
        info.unambiguous = true;
        return info;
    }

    const Table& source = ctx.db->table(from);
    for (const auto& a : ref.filter_attrs) source.schema.require_index(a);

    bool identity = identity_path_applies(*ctx.db, from, to, ref.filter_attrs);
    auto matched = matching_paths(*ctx.db, from, to, ref.filter_attrs, /*key_landing_only=*/true);

    if (!identity && matched.empty() && ref.agg) {
        // Aggregates may traverse non-key-landing (e.g. reversed N-1) hops.
        matched = matching_paths(*ctx.db, from, to, ref.filter_attrs, /*key_landing_only=*/false);
    }

    int candidates = int(matched.size()) + int(identity);
    if (candidates == 0)
        throw Error("no foreign key path from '" + from + "' to '" + to + "' matches filter");
    if (candidates > 1 && !ref.agg)
        throw Error(std::to_string(candidates) + " paths from '" + from + "' to '" + to +
                    "' match the filter; disambiguate or aggregate");

    info.unambiguous = true;
    if (!identity) {
        info.path = matched.front();
        info.all_one_to_one = true;
        for (const auto& hop : info.path.hops) {
            const ForeignKey& fk = ctx.db->constraints.at(hop.constraint);
            if (classify_relationship(fk) != Relationship::OneToOne) info.all_one_to_one = false;
        }
    } else {
        info.path = FkPath{from, to, {}};
        info.all_one_to_one = true;
    }

    // Key transfer: distinct retrieved prop tuples over the terminal instance.
    if (!ref.agg && !ref.props.empty()) {
        std::vector<Row> tuples;
        bool computable = true;
        size_t nrows = target.marks ? target.marks->records.size() : target.table->rows.size();
        for (size_t r = 0; r < nrows; ++r) {
            auto lookup = mark_lookup(target, r);
            Row tuple;
            for (const auto& [ch, prop] : ref.props) {
                try {
                    tuple.push_back(Expr::parse(prop).eval(lookup));
                } catch (const Error&) {
                    computable = false;
                    break;
                }
            }
            if (!computable) break;
            tuples.push_back(std::move(tuple));
        }
        if (computable) {
            std::sort(tuples.begin(), tuples.end(), [](const Row& a, const Row& b) {
                for (size_t i = 0; i < a.size(); ++i) {
                    if (value_less(a[i], b[i])) return true;
                    if (value_less(b[i], a[i])) return false;
                }
                return false;
            });
            info.preserves_key = true;
            for (size_t i = 1; i < tuples.size(); ++i) {
                bool eq = true;
                for (size_t c = 0; c < tuples[i].size(); ++c)
                    if (!value_equals(tuples[i][c], tuples[i - 1][c])) { eq = false; break; }
                if (eq) { info.preserves_key = false; break; }
            }
        }
    }
    return info;
}

ForeignValue get(const ResolveContext& ctx, const ViewSpec& source_view,
                 const ForeignRefSpec& ref) {
    PathInfo info = validate_ref(ctx, source_view, ref);
    ResolvedTarget target = resolve_target(ctx, ref);
    const Table& source = ctx.db->table(source_view.table);
    bool identity = info.unambiguous && info.path.hops.empty() &&
                    ref.filter_kind == ForeignRefSpec::Filter::SourceAttrs;
    std::optional<FkPath> path;
    if (ref.filter_kind == ForeignRefSpec::Filter::SourceAttrs && !identity) path = info.path;

    ForeignValue out;
    std::vector<std::string> channels;
    if (ref.agg) {
        channels.push_back("");
    } else {
        for (const auto& [ch, _] : ref.props) channels.push_back(ch);
    }
    for (const auto& ch : channels) out.columns[ch].reserve(source.rows.size());

    for (size_t r = 0; r < source.rows.size(); ++r) {
        MatchSet m = match_rows(ctx, source, r, ref, target, path, identity);
        if (ref.agg) {
            std::vector<Value> vals;
            if (!ref.agg->over.empty()) {
                Expr over = Expr::parse(ref.agg->over);
                for (size_t mr : m.rows) vals.push_back(over.eval(mark_lookup(target, mr)));
            } else {
                vals.resize(m.rows.size());
            }
            out.columns[""].push_back(reduce(*ref.agg, std::move(vals)));
            continue;
        }
        if (m.rows.empty())
            throw Error("dangling reference: row " + std::to_string(r) + " of '" +
                        source_view.table + "' has no matching mark in '" + ref.view + "'");
        if (m.rows.size() > 1)
            throw Error("reference from '" + source_view.table + "' row " + std::to_string(r) +
                        " matches " + std::to_string(m.rows.size()) + " marks in '" + ref.view +
                        "' without an aggregate");
        auto lookup = mark_lookup(target, m.rows[0]);
        for (const auto& [ch, prop] : ref.props)
            out.columns[ch].push_back(Expr::parse(prop).eval(lookup));
    }
    return out;
}

} // namespace dvl
