#include "dvl/faithful.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "dvl/expr.hpp"
#include "dvl/resolver.hpp"
#include "dvl/scales.hpp"

namespace dvl {

using json = nlohmann::json;

// ---- key constraints (overplotting) ----------------------------------------------

namespace {

double intersection_area(const Extent& a, const Extent& b) {
    double w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    double h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return std::max(w, 0.0) * std::max(h, 0.0);
}

double link_coord(const MarkRecord& rec, const char* ch) {
    auto it = rec.channels.find(ch);
    if (it == rec.channels.end()) return 0;
    auto n = as_number(it->second);
    return n ? *n : 0;
}

/// Links are zero-area segments; only coincident segments overplot. Their
/// bounding-box extents would otherwise flag visually distinct crossing or
/// fanned lines.
bool segments_coincide(const MarkRecord& a, const MarkRecord& b) {
    double ax1 = link_coord(a, "x1"), ay1 = link_coord(a, "y1");
    double ax2 = link_coord(a, "x2"), ay2 = link_coord(a, "y2");
    double bx1 = link_coord(b, "x1"), by1 = link_coord(b, "y1");
    double bx2 = link_coord(b, "x2"), by2 = link_coord(b, "y2");
    bool same = ax1 == bx1 && ay1 == by1 && ax2 == bx2 && ay2 == by2;
    bool flipped = ax1 == bx2 && ay1 == by2 && ax2 == bx1 && ay2 == by1;
    return same || flipped;
}

} // namespace

KeyCheck check_keys(const MarkTable& marks, double threshold) {
    KeyCheck check;
    check.view = marks.view;
    for (size_t i = 0; i < marks.records.size(); ++i) {
        for (size_t j = i + 1; j < marks.records.size(); ++j) {
            const Extent& a = marks.records[i].extent;
            const Extent& b = marks.records[j].extent;
            double fraction;
            if (marks.mark == MarkType::Link) {
                fraction = segments_coincide(marks.records[i], marks.records[j]) ? 1.0 : 0.0;
            } else {
                double min_area = std::min(a.area(), b.area());
                if (min_area <= 0) {
                    // zero-area marks are indistinguishable only when coincident
                    fraction = (a == b) ? 1.0 : 0.0;
                } else {
                    fraction = intersection_area(a, b) / min_area;
                }
            }
            if (fraction > threshold) {
                check.satisfied = false;
                check.violations.push_back(
                    {marks.records[i].key, marks.records[j].key, fraction});
            }
        }
    }
    return check;
}

std::vector<CoverageEntry> check_coverage(const Database& db, const PlotSpec& spec) {
    std::vector<CoverageEntry> out;
    for (const auto& [name, table] : db.tables) {
        CoverageEntry entry;
        entry.table = name;
        for (const auto& v : spec.views) {
            if (v.table == name) {
                entry.view = v.name;
                entry.mapped = true;
                break;
            }
        }
        out.push_back(std::move(entry));
    }
    return out;
}

// ---- foreign key preservation -----------------------------------------------------

namespace {

ResolveContext make_ctx(const Database& db, const PlotSpec& spec, const ExecutionResult& result) {
    return {&db, &spec, [&result](const std::string& name) -> const MarkTable* {
                auto it = result.marks.find(name);
                return it == result.marks.end() ? nullptr : &it->second;
            }};
}

/// Mechanism 1: some view over the source table traverses the constraint via
/// a non-aggregating reference whose retrieved tuples are a key of the target.
bool preserved_by_traversal(const Database& db, const PlotSpec& spec,
                            const ExecutionResult& result, const ForeignKey& fk,
                            std::string& detail) {
    ResolveContext ctx = make_ctx(db, spec, result);
    for (const auto& v : spec.views) {
        if (v.table != fk.src_table) continue;
        std::set<const void*> seen;
        for (const auto& [channel, e] : v.encodings) {
            if (e.kind != Encoding::Kind::Ref || e.ref->agg) continue;
            if (!seen.insert(e.ref.get()).second) continue;
            PathInfo info;
            try {
                info = validate_ref(ctx, v, *e.ref);
            } catch (const Error&) {
                continue;
            }
            bool uses_fk = false;
            for (const auto& hop : info.path.hops)
                if (hop.constraint == fk.name) uses_fk = true;
            if (uses_fk && info.preserves_key) {
                detail = "view '" + v.name + "' traverses it via a key-returning reference to '" +
                         e.ref->view + "'";
                return true;
            }
        }
    }
    return false;
}

/// True when some encoding of `view` exposes a key of `endpoint_table`:
/// either a key-returning reference terminating there, or an expression over
/// attributes that a constraint binds to a key of that table. The constraint
/// under test is excluded: it cannot witness its own representation.
bool side_covered(const Database& db, const PlotSpec& spec, const ExecutionResult& result,
                  const ViewSpec& view, const std::string& endpoint_table,
                  const std::string& checked) {
    ResolveContext ctx = make_ctx(db, spec, result);
    for (const auto& [channel, e] : view.encodings) {
        if (e.kind == Encoding::Kind::Ref && !e.ref->agg) {
            try {
                PathInfo info = validate_ref(ctx, view, *e.ref);
                if (info.terminal == endpoint_table && info.preserves_key) return true;
            } catch (const Error&) {
            }
        }
        if (e.kind == Encoding::Kind::Expression || e.kind == Encoding::Kind::Field) {
            std::set<std::string> names = e.kind == Encoding::Kind::Field
                                              ? std::set<std::string>{e.field}
                                              : Expr::parse(e.expr).references();
            for (const auto& [cname, fk] : db.constraints) {
                if (cname == checked) continue;
                if (fk.src_table != view.table || fk.dst_table != endpoint_table) continue;
                if (!fk.dst_is_key) continue;
                bool all = std::all_of(fk.src_attrs.begin(), fk.src_attrs.end(),
                                       [&](const std::string& a) { return names.count(a) > 0; });
                if (all) return true;
            }
            // the table's own key attributes in an encoding count for itself
            if (view.table == endpoint_table) {
                const Table& t = db.table(endpoint_table);
                for (const auto& key : t.declared_keys) {
                    bool all = std::all_of(key.begin(), key.end(), [&](const std::string& a) {
                        return names.count(a) > 0;
                    });
                    if (all) return true;
                }
            }
        }
    }
    return false;
}

/// Mechanism 2: some view maps key-valued expressions of both endpoints to
/// its mark properties (the constraint rendered as explicit marks/labels).
bool preserved_by_explicit_mark(const Database& db, const PlotSpec& spec,
                                const ExecutionResult& result, const ForeignKey& fk,
                                std::string& detail) {
    for (const auto& v : spec.views) {
        if (side_covered(db, spec, result, v, fk.src_table, fk.name) &&
            side_covered(db, spec, result, v, fk.dst_table, fk.name)) {
            detail = "view '" + v.name + "' maps keys of both '" + fk.src_table + "' and '" +
                     fk.dst_table + "' to mark properties";
            return true;
        }
    }
    return false;
}

/// Mechanism 3: a nest declaration uses the constraint.
bool preserved_by_nesting(const Database& db, const PlotSpec& spec, const ForeignKey& fk,
                          std::string& detail) {
    for (const auto& n : spec.nests) {
        if (n.is_selector()) continue;
        const ViewSpec* child = spec.find_view(n.child);
        const ViewSpec* parent = spec.find_view(n.parent);
        if (!child || !parent) continue;
        if (child->table != fk.src_table || parent->table != fk.dst_table) continue;
        bool uses = false;
        if (n.using_constraint) {
            uses = *n.using_constraint == fk.name;
        } else if (!n.using_pairs.empty()) {
            std::vector<std::string> ca, pa;
            for (const auto& [c, p] : n.using_pairs) {
                ca.push_back(c);
                pa.push_back(p);
            }
            uses = ca == fk.src_attrs && pa == fk.dst_attrs;
        } else {
            // unique-path nests bind to the single constraint between the tables
            int count = 0;
            for (const auto& [name, other] : db.constraints)
                if (other.src_table == child->table && other.dst_table == parent->table) ++count;
            uses = count == 1;
        }
        if (uses) {
            detail = "'" + n.child + "' nests in '" + n.parent + "'";
            return true;
        }
    }
    return false;
}

const ScaleInstance* find_instance(const ExecutionResult& result, const std::string& table,
                                   const PlotSpec& spec, const std::string& attr,
                                   const ViewSpec** out_view, std::string* out_channel) {
    for (const auto& v : spec.views) {
        if (v.table != table) continue;
        for (const auto& inst : result.scale_instances) {
            if (inst.view == v.name && inst.attr == attr) {
                *out_view = &v;
                *out_channel = inst.channel;
                return &inst;
            }
        }
    }
    return nullptr;
}

/// Mechanism 4: each constrained attribute pair is encoded through the same
/// named scale, or through scales whose trained domains are equal.
bool preserved_by_shared_scale(const PlotSpec& spec, const ExecutionResult& result,
                               const ForeignKey& fk, std::string& detail) {
    for (size_t i = 0; i < fk.src_attrs.size(); ++i) {
        const ViewSpec *vs = nullptr, *vt = nullptr;
        std::string cs, ctp;
        const ScaleInstance* si =
            find_instance(result, fk.src_table, spec, fk.src_attrs[i], &vs, &cs);
        const ScaleInstance* ti =
            find_instance(result, fk.dst_table, spec, fk.dst_attrs[i], &vt, &ctp);
        if (!si || !ti) return false;
        bool shared_name = !si->scale_name.empty() && si->scale_name == ti->scale_name;
        if (!shared_name && !domains_equal(si->scale, ti->scale)) return false;
        detail = shared_name
                     ? "'" + fk.src_attrs[i] + "' and '" + fk.dst_attrs[i] +
                           "' share scale '" + si->scale_name + "'"
                     : "scales of '" + fk.src_attrs[i] + "' and '" + fk.dst_attrs[i] +
                           "' have equal domains";
    }
    return true;
}

} // namespace

std::string alignment_level(const PlotSpec& spec, const ExecutionResult& result,
                            const ForeignKey& fk, double proximity_gap) {
    const ViewSpec *vs = nullptr, *vt = nullptr;
    std::string cs, ct;
    const ScaleInstance* si = find_instance(result, fk.src_table, spec, fk.src_attrs[0], &vs, &cs);
    const ScaleInstance* ti = find_instance(result, fk.dst_table, spec, fk.dst_attrs[0], &vt, &ct);
    if (!si || !ti) return "";
    std::string level = "shared-domain";
    if (!ranges_equal(si->scale, ti->scale)) return level;
    level = "relative-alignment";
    if (cs != ct) return level;
    level = "shared-channel";
    const Extent& ea = result.marks.at(vs->name).view_extent;
    const Extent& eb = result.marks.at(vt->name).view_extent;
    bool x_channel = cs == "x" || cs == "x1" || cs == "x2";
    bool aligned = x_channel ? (ea.x == eb.x && ea.w == eb.w) : (ea.y == eb.y && ea.h == eb.h);
    if (!aligned) return level;
    level = "absolute-alignment";
    double gx = std::max({ea.x - (eb.x + eb.w), eb.x - (ea.x + ea.w), 0.0});
    double gy = std::max({ea.y - (eb.y + eb.h), eb.y - (ea.y + ea.h), 0.0});
    if (std::max(gx, gy) <= proximity_gap) level = "spatial-proximity";
    return level;
}

std::vector<FkCheck> check_fk_preservation(const Database& db, const PlotSpec& spec,
                                           const ExecutionResult& result) {
    std::vector<FkCheck> out;
    for (const auto& [name, fk] : db.constraints) {
        FkCheck check;
        check.constraint = name;
        std::string detail;
        if (preserved_by_traversal(db, spec, result, fk, detail)) {
            check.preserved = true;
            check.mechanism = "foreign-attribute-traversal";
        } else if (preserved_by_nesting(db, spec, fk, detail)) {
            check.preserved = true;
            check.mechanism = "nesting";
        } else if (preserved_by_shared_scale(spec, result, fk, detail)) {
            check.preserved = true;
            check.mechanism = "shared-scale";
            check.alignment = alignment_level(spec, result, fk);
        } else if (preserved_by_explicit_mark(db, spec, result, fk, detail)) {
            check.preserved = true;
            check.mechanism = "explicit-mark";
        } else {
            detail = "no reference traverses it, no view maps both endpoint keys, no nest uses "
                     "it, and the endpoint scales do not share domains";
        }
        check.detail = detail;
        out.push_back(std::move(check));
    }
    return out;
}

FaithfulnessReport check_faithfulness(const Database& db, const PlotSpec& spec,
                                      const ExecutionResult& result, double threshold) {
    FaithfulnessReport report;
    report.coverage = check_coverage(db, spec);
    for (const auto& vname : result.view_order)
        report.key_checks.push_back(check_keys(result.marks.at(vname), threshold));
    report.fk_checks = check_fk_preservation(db, spec, result);

    report.faithful = true;
    for (const auto& c : report.coverage)
        if (!c.mapped) report.faithful = false;
    for (const auto& k : report.key_checks)
        if (!k.satisfied) report.faithful = false;
    for (const auto& f : report.fk_checks)
        if (!f.preserved) report.faithful = false;
    return report;
}

// ---- report formats ----------------------------------------------------------------

namespace {

json row_to_json(const Row& row) {
    json j = json::array();
    for (const auto& v : row) {
        if (is_null(v)) j.push_back(nullptr);
        else if (auto* b = std::get_if<bool>(&v)) j.push_back(*b);
        else if (auto* i = std::get_if<int64_t>(&v)) j.push_back(*i);
        else if (auto* d = std::get_if<double>(&v)) j.push_back(*d);
        else j.push_back(std::get<std::string>(v));
    }
    return j;
}

} // namespace

std::string FaithfulnessReport::to_json() const {
    json j;
    json cov = json::array();
    for (const auto& c : coverage) {
        json cj;
        cj["table"] = c.table;
        cj["mapped"] = c.mapped;
        if (c.mapped) cj["view"] = c.view;
        cov.push_back(std::move(cj));
    }
    j["coverage"] = std::move(cov);
    json keys = json::array();
    for (const auto& k : key_checks) {
        json kj;
        kj["view"] = k.view;
        kj["satisfied"] = k.satisfied;
        json viols = json::array();
        for (const auto& v : k.violations) {
            json vj;
            vj["keys"] = {row_to_json(v.key_a), row_to_json(v.key_b)};
            vj["overlap"] = v.overlap_fraction;
            viols.push_back(std::move(vj));
        }
        if (!viols.empty()) kj["violations"] = std::move(viols);
        keys.push_back(std::move(kj));
    }
    j["keys"] = std::move(keys);
    json fks = json::array();
    for (const auto& f : fk_checks) {
        json fj;
        fj["constraint"] = f.constraint;
        fj["preserved"] = f.preserved;
        if (f.preserved) fj["mechanism"] = f.mechanism;
        if (!f.alignment.empty()) fj["alignment"] = f.alignment;
        fj["detail"] = f.detail;
        fks.push_back(std::move(fj));
    }
    j["foreign_keys"] = std::move(fks);
    j["faithful"] = faithful;
    return j.dump(2) + "\n";
}

std::string FaithfulnessReport::to_text() const {
    std::string out;
    out += "coverage:\n";
    for (const auto& c : coverage)
        out += "  " + c.table + ": " + (c.mapped ? "mapped to " + c.view : "UNMAPPED") + "\n";
    out += "keys:\n";
    for (const auto& k : key_checks) {
        out += "  " + k.view + ": " + (k.satisfied ? "ok" : "OVERPLOTTED") + "\n";
        for (const auto& v : k.violations) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f", v.overlap_fraction);
            out += "    overlap " + std::string(buf) + " between keys " +
                   row_to_json(v.key_a).dump() + " and " + row_to_json(v.key_b).dump() + "\n";
        }
    }
    out += "foreign keys:\n";
    for (const auto& f : fk_checks) {
        out += "  " + f.constraint + ": ";
        if (f.preserved) {
            out += "preserved via " + f.mechanism;
            if (!f.alignment.empty()) out += " (" + f.alignment + ")";
        } else {
            out += "VIOLATED";
        }
        out += " - " + f.detail + "\n";
    }
    out += std::string("verdict: ") + (faithful ? "faithful" : "unfaithful") + "\n";
    return out;
}

} // namespace dvl
