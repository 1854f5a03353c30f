#include "dvl/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dvl/expr.hpp"
#include "dvl/layouts.hpp"
#include "dvl/resolver.hpp"

namespace dvl {

using json = nlohmann::json;

double measure_text_width(const std::string& text, double font_size) {
    // glyph count, not bytes: count UTF-8 lead bytes
    size_t glyphs = 0;
    for (unsigned char c : text)
        if ((c & 0xC0) != 0x80) ++glyphs;
    return 0.6 * font_size * static_cast<double>(glyphs);
}

double measure_text_height(double font_size) { return 1.2 * font_size; }

std::string task_kind_name(Task::Kind k) {
    switch (k) {
        case Task::Kind::Transform: return "Transform";
        case Task::Kind::TrainScale: return "TrainScale";
        case Task::Kind::InstantiateMarks: return "InstantiateMarks";
        case Task::Kind::ResolveForeign: return "ResolveForeign";
        case Task::Kind::RunLayout: return "RunLayout";
        case Task::Kind::NestExtents: return "NestExtents";
        case Task::Kind::Render: return "Render";
    }
    return "?";
}

// ---- channel classification ---------------------------------------------------

namespace {

bool is_x_channel(const std::string& ch) { return ch == "x" || ch == "x1" || ch == "x2"; }
bool is_y_channel(const std::string& ch) { return ch == "y" || ch == "y1" || ch == "y2"; }
bool is_positional(const std::string& ch) { return is_x_channel(ch) || is_y_channel(ch); }
bool is_size_channel(const std::string& ch) { return ch == "w" || ch == "h"; }
bool is_color_channel(const std::string& ch) {
    return ch == "color" || ch == "fill" || ch == "stroke";
}

/// Channels whose field scales train/apply within the parent extent when the
/// view is nested. Positional constants/expressions are parent-local too.
bool nest_deferred(const std::string& ch) { return is_positional(ch) || is_size_channel(ch); }

double number_or(const Value* v, double fallback) {
    if (!v) return fallback;
    auto n = as_number(*v);
    return n ? *n : fallback;
}

/// '5em' style constants resolve against the mark's font size.
std::optional<double> em_to_px(const Value& v, double font_size) {
    auto* s = std::get_if<std::string>(&v);
    if (!s || s->size() < 3 || s->substr(s->size() - 2) != "em") return std::nullopt;
    try {
        size_t used = 0;
        double n = std::stod(s->substr(0, s->size() - 2), &used);
        if (used != s->size() - 2) return std::nullopt;
        return n * font_size;
    } catch (...) {
        return std::nullopt;
    }
}

} // namespace

Extent mark_extent(MarkType mark, const MarkRecord& rec) {
    auto ch = [&](const char* name) -> const Value* {
        auto it = rec.channels.find(name);
        return it == rec.channels.end() ? nullptr : &it->second;
    };
    double font = number_or(ch("fontSize"), 12.0);
    auto len = [&](const char* name, double fallback) {
        const Value* v = ch(name);
        if (!v) return fallback;
        if (auto em = em_to_px(*v, font)) return *em;
        return number_or(v, fallback);
    };
    switch (mark) {
        case MarkType::Point: {
            double r = number_or(ch("r"), 3.0);
            return {number_or(ch("x"), 0) - r, number_or(ch("y"), 0) - r, 2 * r, 2 * r};
        }
        case MarkType::Rect:
        case MarkType::Square: {
            double w = len("w", 0), h = len("h", 0);
            if (mark == MarkType::Square) {
                if (!ch("h")) h = w;
                if (!ch("w")) w = h;
            }
            return {number_or(ch("x"), 0), number_or(ch("y"), 0), w, h};
        }
        case MarkType::Link: {
            double x1 = number_or(ch("x1"), 0), y1 = number_or(ch("y1"), 0);
            double x2 = number_or(ch("x2"), 0), y2 = number_or(ch("y2"), 0);
            return {std::min(x1, x2), std::min(y1, y2), std::abs(x2 - x1), std::abs(y2 - y1)};
        }
        case MarkType::Label:
        case MarkType::Text: {
            std::string text = ch("text") ? value_to_string(*ch("text")) : "";
            double w = len("w", measure_text_width(text, font));
            double h = len("h", measure_text_height(font));
            return {number_or(ch("x"), 0) + number_or(ch("dx"), 0),
                    number_or(ch("y"), 0) + number_or(ch("dy"), 0), w, h};
        }
    }
    return {};
}

// ---- compilation ----------------------------------------------------------------

namespace {

struct ViewInfo {
    const ViewSpec* view = nullptr;
    const NestDecl* nest = nullptr;  // the decl this view is nested by, if any
    std::vector<std::shared_ptr<ForeignRefSpec>> refs;      // distinct groups
    std::vector<std::shared_ptr<LayoutUse>> layout_uses;    // distinct uses
};

struct Plan {
    std::map<std::string, ViewInfo> views;  // by view name
    std::vector<std::string> view_order;
    std::map<std::string, int> instantiate;
    std::map<const ForeignRefSpec*, int> resolve;
    std::map<const LayoutUse*, int> run_layout;
    std::map<std::string, int> nest_node;  // child view -> node
    std::map<std::string, int> train_scale;
    int render = -1;
    std::vector<int> transforms;
};

Plan analyze(const PlotSpec& spec) {
    Plan plan;
    for (const auto& v : spec.views) {
        ViewInfo info;
        info.view = &v;
        std::set<const void*> seen;
        for (const auto& [channel, e] : v.encodings) {
            if (e.kind == Encoding::Kind::Ref && seen.insert(e.ref.get()).second)
                info.refs.push_back(e.ref);
            if (e.kind == Encoding::Kind::Layout && seen.insert(e.layout.get()).second)
                info.layout_uses.push_back(e.layout);
        }
        plan.views.emplace(v.name, std::move(info));
        plan.view_order.push_back(v.name);
    }
    for (const auto& n : spec.nests) {
        std::vector<std::string> children =
            n.is_selector() ? n.children : std::vector<std::string>{n.child};
        for (const auto& c : children) {
            auto it = plan.views.find(c);
            if (it == plan.views.end()) throw Error("nest references unknown view '" + c + "'");
            if (it->second.nest)
                throw Error("view '" + c + "' is nested by more than one declaration");
            it->second.nest = &n;
        }
    }
    return plan;
}

std::string ref_detail(const ForeignRefSpec& r) {
    std::string chans;
    for (const auto& [ch, _] : r.props) chans += (chans.empty() ? "" : ",") + ch;
    if (r.agg) chans = "agg(" + chans + ")";
    return r.view + ":" + chans;
}

/// The task that produces channel `ch` of view `u`.
int producer_of(const Plan& plan, const std::string& u, const std::string& ch) {
    const ViewInfo& info = plan.views.at(u);
    auto enc = info.view->encodings.find(ch);
    bool nested = info.nest != nullptr;
    if (enc == info.view->encodings.end()) return plan.instantiate.at(u);
    const Encoding& e = enc->second;
    switch (e.kind) {
        case Encoding::Kind::Ref:
            return plan.resolve.at(e.ref.get());
        case Encoding::Kind::Layout:
            return plan.run_layout.at(e.layout.get());
        default:
            if (nested && nest_deferred(ch)) return plan.nest_node.at(u);
            return plan.instantiate.at(u);
    }
}

/// Every task contributing to a view's completed geometry.
std::vector<int> completion_of(const Plan& plan, const std::string& u) {
    const ViewInfo& info = plan.views.at(u);
    std::vector<int> out = {plan.instantiate.at(u)};
    for (const auto& r : info.refs) out.push_back(plan.resolve.at(r.get()));
    for (const auto& l : info.layout_uses) out.push_back(plan.run_layout.at(l.get()));
    if (info.nest) out.push_back(plan.nest_node.at(u));
    return out;
}

/// Channels of the target view a reference reads (prop expressions and
/// predicates may name channels; unknown names fall through to data attrs).
std::set<std::string> channels_read(const ForeignRefSpec& ref, const ViewSpec& target) {
    std::set<std::string> read;
    const auto& legal = channels_for(target.mark);
    auto note = [&](const std::string& name) {
        if (std::find(legal.begin(), legal.end(), name) != legal.end()) read.insert(name);
    };
    for (const auto& [ch, prop] : ref.props) {
        Expr parsed = Expr::parse(prop);
        for (const auto& name : parsed.references()) note(name);
    }
    if (ref.agg && !ref.agg->over.empty()) {
        Expr parsed = Expr::parse(ref.agg->over);
        for (const auto& name : parsed.references()) note(name);
    }
    for (const auto& [col, v] : ref.predicate) note(col);
    return read;
}

} // namespace

TaskGraph compile(const PlotSpec& spec, const Database& db, const TransformPlan* prep) {
    Database prepared = db;
    if (prep) apply_plan(prepared, *prep);

    auto diags = validate_spec(spec, prepared);
    if (!diags.empty()) {
        std::string msg = "spec does not validate:";
        for (const auto& d : diags) msg += "\n  [" + d.path + "] " + d.message;
        throw Error(msg);
    }

    TaskGraph g;
    g.spec = spec;
    if (prep) g.prep = *prep;

    Plan plan = analyze(g.spec);
    auto add_node = [&](Task::Kind kind, const std::string& view, const std::string& detail) {
        g.nodes.push_back({kind, view, detail});
        return static_cast<int>(g.nodes.size()) - 1;
    };

    for (size_t i = 0; i < g.prep.steps.size(); ++i)
        plan.transforms.push_back(add_node(Task::Kind::Transform, "", "step " + std::to_string(i)));
    for (const auto& [name, s] : g.spec.scales)
        plan.train_scale[name] = add_node(Task::Kind::TrainScale, "", name);
    for (const auto& vname : plan.view_order) {
        const ViewInfo& info = plan.views.at(vname);
        plan.instantiate[vname] = add_node(Task::Kind::InstantiateMarks, vname, "");
        for (const auto& r : info.refs)
            plan.resolve[r.get()] = add_node(Task::Kind::ResolveForeign, vname, ref_detail(*r));
        for (const auto& l : info.layout_uses)
            plan.run_layout[l.get()] = add_node(Task::Kind::RunLayout, vname, l->name);
    }
    for (const auto& n : g.spec.nests) {
        std::vector<std::string> children =
            n.is_selector() ? n.children : std::vector<std::string>{n.child};
        for (const auto& c : children)
            plan.nest_node[c] = add_node(Task::Kind::NestExtents, c, "in " + n.parent);
    }
    plan.render = add_node(Task::Kind::Render, "", "");

    std::set<std::pair<int, int>> edges;
    auto add_edge = [&](int from, int to) {
        if (from != to) edges.insert({from, to});
    };

    for (size_t i = 1; i < plan.transforms.size(); ++i)
        add_edge(plan.transforms[i - 1], plan.transforms[i]);
    int last_transform = plan.transforms.empty() ? -1 : plan.transforms.back();
    auto after_transforms = [&](int node) {
        if (last_transform >= 0) add_edge(last_transform, node);
    };

    for (const auto& [name, node] : plan.train_scale) after_transforms(node);

    for (const auto& vname : plan.view_order) {
        const ViewInfo& info = plan.views.at(vname);
        int inst = plan.instantiate.at(vname);
        after_transforms(inst);
        add_edge(inst, plan.render);

        for (const auto& [channel, e] : info.view->encodings) {
            if (e.kind == Encoding::Kind::Field && !e.scale.empty())
                add_edge(plan.train_scale.at(e.scale), inst);
        }
        for (const auto& r : info.refs) {
            int node = plan.resolve.at(r.get());
            add_edge(inst, node);
            add_edge(node, plan.render);
            const ViewSpec* target = g.spec.find_view(r->view);
            if (!target) continue;  // direct table reference: data only
            std::set<std::string> read = channels_read(*r, *target);
            for (const auto& ch : read) add_edge(producer_of(plan, target->name, ch), node);
            // measured label geometry depends on text and font size
            bool reads_measured =
                (target->mark == MarkType::Label || target->mark == MarkType::Text) &&
                (read.count("w") || read.count("h"));
            if (reads_measured) {
                for (const char* me : {"text", "fontSize"})
                    if (target->encodings.count(me))
                        add_edge(producer_of(plan, target->name, me), node);
            }
            if (read.empty()) add_edge(plan.instantiate.at(target->name), node);
        }
        for (const auto& l : info.layout_uses) {
            int node = plan.run_layout.at(l.get());
            add_edge(inst, node);
            add_edge(node, plan.render);
            if (info.nest) add_edge(plan.nest_node.at(vname), node);
            const LayoutBinding& binding = g.spec.layouts.at(l->name);
            if (binding.algo == LayoutAlgo::Force) {
                // node sizes read the view's own w/h marks when present
                for (const char* ch : {"w", "h"})
                    if (info.view->encodings.count(ch))
                        add_edge(producer_of(plan, vname, ch), node);
            }
        }
        if (info.nest) {
            int node = plan.nest_node.at(vname);
            add_edge(inst, node);
            add_edge(node, plan.render);
            for (int task : completion_of(plan, info.nest->parent)) add_edge(task, node);
        }
    }

    g.edges.assign(edges.begin(), edges.end());

    // stable topological order (smallest ready node first)
    std::vector<int> indegree(g.nodes.size(), 0);
    for (const auto& [from, to] : g.edges) ++indegree[to];
    std::vector<int> ready;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end());
        int node = *it;
        ready.erase(it);
        g.order.push_back(node);
        for (const auto& [from, to] : g.edges)
            if (from == node && --indegree[to] == 0) ready.push_back(to);
    }
    if (g.order.size() != g.nodes.size()) {
        std::string cycle;
        for (size_t i = 0; i < g.nodes.size(); ++i) {
            if (std::find(g.order.begin(), g.order.end(), static_cast<int>(i)) != g.order.end())
                continue;
            const Task& t = g.nodes[i];
            cycle += "\n  " + task_kind_name(t.kind) + "(" + t.view +
                     (t.detail.empty() ? "" : " " + t.detail) + ")";
        }
        throw Error("dependency cycle among tasks:" + cycle);
    }
    return g;
}

std::string TaskGraph::to_json() const {
    json j;
    json ns = json::array();
    for (const auto& n : nodes) {
        json nj;
        nj["kind"] = task_kind_name(n.kind);
        if (!n.view.empty()) nj["view"] = n.view;
        if (!n.detail.empty()) nj["detail"] = n.detail;
        ns.push_back(std::move(nj));
    }
    j["nodes"] = std::move(ns);
    j["edges"] = edges;
    j["order"] = order;
    return j.dump(2) + "\n";
}

// ---- execution ------------------------------------------------------------------

namespace {

struct Exec {
    const TaskGraph& graph;
    const PlotSpec& spec;
    Database db;
    Plan plan;
    ExecutionResult result;

    Exec(const TaskGraph& g, const Database& base)
        : graph(g), spec(g.spec), db(base), plan(analyze(g.spec)) {}

    Extent plot_extent() const { return {0, 0, spec.width, spec.height}; }

    MarkTable& marks(const std::string& view) { return result.marks.at(view); }

    const NestAssignment* assignment(const std::string& view) const {
        auto it = result.nest_assignments.find(view);
        return it == result.nest_assignments.end() ? nullptr : &it->second;
    }

    std::vector<Value> column(const Table& t, const std::string& attr) {
        int idx = t.schema.require_index(attr);
        std::vector<Value> out;
        out.reserve(t.rows.size());
        for (const auto& row : t.rows) out.push_back(row[idx]);
        return out;
    }

    std::pair<double, double> channel_range(const std::string& ch, const Extent& ext) {
        if (is_x_channel(ch)) return {ext.x, ext.x + ext.w};
        if (is_y_channel(ch)) return {ext.y, ext.y + ext.h};
        if (ch == "w") return {0, ext.w};
        if (ch == "h") return {0, ext.h};
        if (ch == "r") return {2, 8};
        if (ch == "fontSize") return {8, 20};
        if (ch == "strokeWidth") return {1, 6};
        if (ch == "opacity") return {0.3, 1};
        return {0, 1};
    }

    ScaleKind infer_kind(const Table& t, const std::string& attr) {
        TypeKind k = t.schema.attributes[t.schema.require_index(attr)].type.kind;
        return (k == TypeKind::Integer || k == TypeKind::Real) ? ScaleKind::Linear
                                                               : ScaleKind::Ordinal;
    }

    size_t category_index(Scale& scale, const Value& v) {
        for (size_t i = 0; i < scale.categories.size(); ++i)
            if (value_equals(scale.categories[i], v)) return i;
        scale.categories.push_back(v);
        return scale.categories.size() - 1;
    }

    Value color_value(Scale& scale, const Value& v) {
        if (auto* s = std::get_if<std::string>(&v); s && !s->empty() && (*s)[0] == '#')
            return v;  // literal colors pass through
        if (scale.kind == ScaleKind::Linear && scale.trained) {
            if (!scale.range_set) scale.set_range(0, 1);
            return ramp_color(scale.apply(v));
        }
        return ordinal_color(category_index(scale, v));
    }

    /// Fills one Field-encoded channel for the given rows within an extent.
    void apply_field(const ViewSpec& view, const std::string& channel, const Encoding& e,
                     const std::vector<size_t>& rows, const Extent& ext) {
        const Table& t = db.table(view.table);
        Scale scale;
        if (!e.scale.empty()) {
            scale = result.named_scales.at(e.scale);  // shared trained domain
        } else {
            ScaleSpec anon;
            anon.kind = infer_kind(t, e.field);
            scale = make_scale(anon);
            std::vector<Value> vals;
            for (size_t r : rows) vals.push_back(t.rows[r][t.schema.require_index(e.field)]);
            scale.train(vals);
        }
        MarkTable& mt = marks(view.name);
        int idx = t.schema.require_index(e.field);
        if (is_color_channel(channel)) {
            if (!scale.range_set) scale.set_range(0, 1);
            for (size_t r : rows)
                mt.records[r].channels[channel] = color_value(scale, t.rows[r][idx]);
        } else if (channel == "symbol") {
            static const std::vector<std::string> symbols = {"circle", "square", "triangle",
                                                             "cross", "diamond"};
            if (!scale.range_set) scale.set_range(0, 1);
            for (size_t r : rows) {
                size_t i = category_index(scale, t.rows[r][idx]);
                mt.records[r].channels[channel] = symbols[i % symbols.size()];
            }
        } else if (channel == "text" || channel == "textDecoration") {
            if (!scale.range_set) scale.set_range(0, 1);
            for (size_t r : rows)
                mt.records[r].channels[channel] = value_to_string(t.rows[r][idx]);
        } else {
            if (!scale.range_set) {
                auto [lo, hi] = channel_range(channel, ext);
                scale.set_range(lo, hi);
            }
            for (size_t r : rows)
                mt.records[r].channels[channel] = scale.apply(t.rows[r][idx]);
        }
        result.scale_instances.push_back({e.scale, view.name, channel, e.field, scale});
    }

    /// Fills Const/Expr/Field channels for the given rows. When `translate`
    /// is set, positional constants/expressions are offsets into `ext`.
    void fill_local(const ViewSpec& view, const std::string& channel, const Encoding& e,
                    const std::vector<size_t>& rows, const Extent& ext, bool translate = false) {
        const Table& t = db.table(view.table);
        MarkTable& mt = marks(view.name);
        switch (e.kind) {
            case Encoding::Kind::Const: {
                Value v = e.constant;
                if (translate && is_positional(channel))
                    v = number_or(&e.constant, 0) + (is_x_channel(channel) ? ext.x : ext.y);
                if (is_size_channel(channel) &&
                    (view.mark == MarkType::Label || view.mark == MarkType::Text)) {
                    // em sizes resolve now when the font is constant or default
                    auto fe = view.encodings.find("fontSize");
                    if (fe == view.encodings.end() || fe->second.kind == Encoding::Kind::Const) {
                        double font = fe == view.encodings.end()
                                          ? 12.0
                                          : number_or(&fe->second.constant, 12.0);
                        if (auto px = em_to_px(v, font)) v = *px;
                    }
                }
                for (size_t r : rows) mt.records[r].channels[channel] = v;
                break;
            }
            case Encoding::Kind::Expression: {
                Expr expr = Expr::parse(e.expr);
                double offset = !translate || !is_positional(channel) ? 0.0
                                : is_x_channel(channel)               ? ext.x
                                                                      : ext.y;
                for (size_t r : rows) {
                    Value v = expr.eval([&](const std::string& name) -> std::optional<Value> {
                        int i = t.schema.index_of(name);
                        if (i < 0) return std::nullopt;
                        return t.rows[r][i];
                    });
                    if (offset != 0.0) v = number_or(&v, 0) + offset;
                    mt.records[r].channels[channel] = v;
                }
                break;
            }
            case Encoding::Kind::Field:
                apply_field(view, channel, e, rows, ext);
                break;
            default:
                break;  // refs and layouts have their own tasks
        }
    }

    /// Label/text marks get measured w/h once text and fontSize are known.
    void measure_labels(const std::string& vname) {
        const ViewSpec& view = *plan.views.at(vname).view;
        if (view.mark != MarkType::Label && view.mark != MarkType::Text) return;
        MarkTable& mt = marks(vname);
        if (mt.records.empty()) return;
        if (view.encodings.count("text") && !mt.records[0].channels.count("text")) return;
        if (view.encodings.count("fontSize") && !mt.records[0].channels.count("fontSize")) return;
        for (auto& rec : mt.records) {
            auto fit = rec.channels.find("fontSize");
            double font = fit == rec.channels.end() ? 12.0 : number_or(&fit->second, 12.0);
            std::string text =
                rec.channels.count("text") ? value_to_string(rec.channels.at("text")) : "";
            if (!view.encodings.count("w") && !rec.channels.count("w"))
                rec.channels["w"] = measure_text_width(text, font);
            if (!view.encodings.count("h") && !rec.channels.count("h"))
                rec.channels["h"] = measure_text_height(font);
        }
    }

    void run_train_scale(const std::string& name) {
        Scale scale = make_scale(spec.scales.at(name));
        for (const auto& vname : plan.view_order) {
            const ViewSpec& v = *plan.views.at(vname).view;
            if (!db.has_table(v.table)) continue;
            for (const auto& [channel, e] : v.encodings)
                if (e.kind == Encoding::Kind::Field && e.scale == name)
                    scale.train(column(db.table(v.table), e.field));
        }
        result.named_scales[name] = std::move(scale);
    }

    void run_instantiate(const std::string& vname) {
        const ViewInfo& info = plan.views.at(vname);
        const ViewSpec& view = *info.view;
        const Table& t = db.table(view.table);
        MarkTable mt;
        mt.view = vname;
        mt.mark = view.mark;
        mt.table = view.table;
        mt.view_extent = plot_extent();
        mt.records.resize(t.rows.size());
        std::vector<int> key_idx;
        for (const auto& k : t.schema.primary_key) key_idx.push_back(t.schema.require_index(k));
        for (size_t r = 0; r < t.rows.size(); ++r)
            for (int k : key_idx) mt.records[r].key.push_back(t.rows[r][k]);
        result.marks.emplace(vname, std::move(mt));
        result.view_order.push_back(vname);

        std::vector<size_t> all(t.rows.size());
        std::iota(all.begin(), all.end(), 0);
        bool nested = info.nest != nullptr;
        for (const auto& [channel, e] : view.encodings) {
            if (nested && nest_deferred(channel) &&
                (e.kind == Encoding::Kind::Field || e.kind == Encoding::Kind::Const ||
                 e.kind == Encoding::Kind::Expression))
                continue;  // filled by NestExtents within the parent extent
            fill_local(view, channel, e, all, plot_extent());
        }
        measure_labels(vname);
    }

    void run_resolve(const std::string& vname, const ForeignRefSpec& ref) {
        const ViewSpec& view = *plan.views.at(vname).view;
        ResolveContext ctx{&db, &spec,
                           [this](const std::string& name) -> const MarkTable* {
                               auto it = result.marks.find(name);
                               return it == result.marks.end() ? nullptr : &it->second;
                           }};
        ForeignValue fv = get(ctx, view, ref);
        MarkTable& mt = marks(vname);
        if (ref.agg) {
            // an aggregating ref fills the channels it is declared under
            for (const auto& [channel, e] : view.encodings) {
                if (e.kind != Encoding::Kind::Ref || e.ref.get() != &ref) continue;
                const auto& vals = fv.columns.at("");
                for (size_t r = 0; r < mt.records.size(); ++r)
                    mt.records[r].channels[channel] = vals[r];
            }
        } else {
            for (const auto& [channel, vals] : fv.columns)
                for (size_t r = 0; r < mt.records.size(); ++r)
                    mt.records[r].channels[channel] = vals[r];
        }
        measure_labels(vname);
    }

    void run_layout_task(const std::string& vname, const LayoutUse& use) {
        const ViewInfo& info = plan.views.at(vname);
        const LayoutBinding& binding = spec.layouts.at(use.name);
        const Table& t = db.table(info.view->table);
        MarkTable& mt = marks(vname);

        // one group per host extent; a single all-rows group for root views
        std::vector<std::pair<Extent, std::vector<size_t>>> groups;
        if (const NestAssignment* na = assignment(vname)) {
            std::map<int, size_t> by_parent;
            for (size_t r = 0; r < t.rows.size(); ++r) {
                int p = na->parent_row[r];
                auto it = by_parent.find(p);
                if (it == by_parent.end()) {
                    by_parent.emplace(p, groups.size());
                    groups.push_back({na->extents[r], {r}});
                } else {
                    groups[it->second].second.push_back(r);
                }
            }
        } else {
            std::vector<size_t> all(t.rows.size());
            std::iota(all.begin(), all.end(), 0);
            groups.push_back({plot_extent(), std::move(all)});
        }

        for (auto& [extent, rows] : groups) {
            LayoutResult lr = run_algo(binding, t, rows, extent, vname);
            for (size_t i = 0; i < rows.size(); ++i) {
                size_t r = rows[i];
                for (const auto& ch : use.channels) {
                    if (ch == "x") mt.records[r].channels["x"] = lr.x[i];
                    else if (ch == "y") mt.records[r].channels["y"] = lr.y[i];
                    else if (ch == "w") mt.records[r].channels["w"] = lr.w[i];
                    else if (ch == "h") mt.records[r].channels["h"] = lr.h[i];
                }
            }
        }
    }

    LayoutResult run_algo(const LayoutBinding& binding, const Table& t,
                          const std::vector<size_t>& rows, const Extent& extent,
                          const std::string& vname) {
        switch (binding.algo) {
            case LayoutAlgo::SQ:
            case LayoutAlgo::OS:
            case LayoutAlgo::VT:
            case LayoutAlgo::HZ: {
                std::vector<double> weights;
                for (size_t r : rows) {
                    if (binding.weight_attr.empty()) {
                        weights.push_back(binding.weight_const);
                    } else {
                        const Value& v = t.rows[r][t.schema.require_index(binding.weight_attr)];
                        auto n = as_number(v);
                        if (!n)
                            throw Error("layout '" + binding.name + "': non-numeric weight '" +
                                        value_to_string(v) + "'");
                        weights.push_back(*n);
                    }
                }
                if (binding.algo == LayoutAlgo::SQ) return squarify(weights, extent, false);
                if (binding.algo == LayoutAlgo::OS) return squarify(weights, extent, true);
                return partition(weights, extent,
                                 binding.algo == LayoutAlgo::VT ? Axis::Vertical
                                                                : Axis::Horizontal);
            }
            case LayoutAlgo::EQ:
                return grid(rows.size(), extent, binding.cols);
            case LayoutAlgo::Tree: {
                std::vector<std::pair<Value, Value>> edges;
                int ci = t.schema.require_index(binding.child_attr);
                int pi = t.schema.require_index(binding.parent_attr);
                for (size_t r : rows) edges.push_back({t.rows[r][ci], t.rows[r][pi]});
                return tree_layout(edges, extent);
            }
            case LayoutAlgo::Force: {
                const Table& et = db.table(binding.edges->table);
                std::vector<std::pair<Value, Value>> edges;
                int si = et.schema.require_index(binding.edges->src);
                int di = et.schema.require_index(binding.edges->dst);
                for (const auto& row : et.rows) edges.push_back({row[si], row[di]});
                std::vector<Value> keys;
                int ki = t.schema.require_index(t.schema.primary_key.front());
                for (size_t r : rows) keys.push_back(t.rows[r][ki]);
                std::vector<std::pair<double, double>> sizes;
                const MarkTable& mt = marks(vname);
                for (size_t r : rows) {
                    const Value* w = mt.channel(r, "w");
                    const Value* h = mt.channel(r, "h");
                    sizes.push_back({number_or(w, 0), number_or(h, 0)});
                }
                return force_layout(edges, keys, sizes, extent, binding.seed,
                                    binding.iterations);
            }
        }
        throw Error("unhandled layout algorithm");
    }

    void run_nest(const std::string& child_name, const NestDecl& decl) {
        const ViewSpec& child = *plan.views.at(child_name).view;
        const ViewSpec& parent = *plan.views.at(decl.parent).view;
        const Table& ct = db.table(child.table);
        const Table& pt = db.table(parent.table);
        const MarkTable& pmarks = marks(decl.parent);

        NestAssignment na;
        na.parent_view = decl.parent;
        na.parent_row.resize(ct.rows.size(), -1);
        na.extents.resize(ct.rows.size());

        if (decl.is_selector()) {
            int host = -1;
            int bi = pt.schema.require_index(decl.by_attr);
            for (size_t p = 0; p < pt.rows.size(); ++p) {
                auto it = decl.by_map.find(value_to_string(pt.rows[p][bi]));
                if (it == decl.by_map.end())
                    throw Error("nest selector: no view mapped for '" +
                                value_to_string(pt.rows[p][bi]) + "'");
                if (it->second != child_name) continue;
                if (host >= 0)
                    throw Error("nest selector: view '" + child_name +
                                "' selected by more than one parent row");
                host = static_cast<int>(p);
            }
            if (host < 0)
                throw Error("nest selector: view '" + child_name + "' selected by no parent row");
            Extent ext = mark_extent(parent.mark, pmarks.records[host]);
            for (size_t r = 0; r < ct.rows.size(); ++r) {
                na.parent_row[r] = host;
                na.extents[r] = ext;
            }
        } else {
            std::vector<std::string> child_attrs, parent_attrs;
            if (decl.using_constraint) {
                const ForeignKey& fk = db.constraints.at(*decl.using_constraint);
                child_attrs = fk.src_attrs;
                parent_attrs = fk.dst_attrs;
            } else if (!decl.using_pairs.empty()) {
                for (const auto& [ca, pa] : decl.using_pairs) {
                    child_attrs.push_back(ca);
                    parent_attrs.push_back(pa);
                }
            } else {
                for (const auto& [name, fk] : db.constraints) {
                    if (fk.src_table == child.table && fk.dst_table == parent.table) {
                        child_attrs = fk.src_attrs;
                        parent_attrs = fk.dst_attrs;
                        break;
                    }
                }
                if (child_attrs.empty())
                    throw Error("nest: no constraint relates '" + child.table + "' to '" +
                                parent.table + "'");
            }
            std::vector<int> cidx, pidx;
            for (const auto& a : child_attrs) cidx.push_back(ct.schema.require_index(a));
            for (const auto& a : parent_attrs) pidx.push_back(pt.schema.require_index(a));
            for (size_t r = 0; r < ct.rows.size(); ++r) {
                int found = -1;
                for (size_t p = 0; p < pt.rows.size(); ++p) {
                    bool eq = true;
                    for (size_t k = 0; k < cidx.size(); ++k)
                        if (!value_equals(ct.rows[r][cidx[k]], pt.rows[p][pidx[k]])) {
                            eq = false;
                            break;
                        }
                    if (!eq) continue;
                    if (found >= 0)
                        throw Error("nest: child row " + std::to_string(r) +
                                    " matches multiple parent marks");
                    found = static_cast<int>(p);
                }
                if (found < 0)
                    throw Error("nest: child row " + std::to_string(r) + " of '" + child.table +
                                "' has no parent mark in '" + decl.parent + "'");
                na.parent_row[r] = found;
                na.extents[r] = mark_extent(parent.mark, pmarks.records[found]);
            }
        }

        // deferred spatial channels, trained and applied per parent group;
        // scaled fields keep a small inset so marks sit inside the host
        std::map<int, std::vector<size_t>> groups;
        for (size_t r = 0; r < ct.rows.size(); ++r) groups[na.parent_row[r]].push_back(r);
        for (const auto& [channel, e] : child.encodings) {
            if (!nest_deferred(channel)) continue;
            if (e.kind != Encoding::Kind::Field && e.kind != Encoding::Kind::Const &&
                e.kind != Encoding::Kind::Expression)
                continue;
            for (const auto& [p, rows] : groups) {
                Extent ext = na.extents[rows.front()];
                if (e.kind == Encoding::Kind::Field) {
                    double pad = std::min({4.0, ext.w / 4, ext.h / 4});
                    ext = {ext.x + pad, ext.y + pad, ext.w - 2 * pad, ext.h - 2 * pad};
                }
                fill_local(child, channel, e, rows, ext, /*translate=*/true);
            }
        }
        result.nest_assignments[child_name] = std::move(na);
        measure_labels(child_name);
    }

    void finalize() {
        for (const auto& vname : plan.view_order) {
            const ViewSpec& view = *plan.views.at(vname).view;
            MarkTable& mt = marks(vname);
            for (auto& rec : mt.records) {
                switch (view.mark) {
                    case MarkType::Point:
                        rec.channels.try_emplace("r", 3.0);
                        rec.channels.try_emplace("color", std::string("black"));
                        break;
                    case MarkType::Link:
                        rec.channels.try_emplace("stroke", std::string("black"));
                        rec.channels.try_emplace("strokeWidth", 1.0);
                        break;
                    case MarkType::Label:
                    case MarkType::Text:
                        rec.channels.try_emplace("fontSize", 12.0);
                        break;
                    case MarkType::Square:
                    case MarkType::Rect:
                        if (rec.channels.count("stroke"))
                            rec.channels.try_emplace("strokeWidth", 1.0);
                        break;
                }
                if (view.mark == MarkType::Square) {
                    if (rec.channels.count("w") && !rec.channels.count("h"))
                        rec.channels["h"] = rec.channels["w"];
                    else if (rec.channels.count("h") && !rec.channels.count("w"))
                        rec.channels["w"] = rec.channels["h"];
                }
                // em-valued label sizes become pixels once the font is final
                if (view.mark == MarkType::Label || view.mark == MarkType::Text) {
                    double font = number_or(&rec.channels.at("fontSize"), 12.0);
                    for (const char* ch : {"w", "h"}) {
                        auto it = rec.channels.find(ch);
                        if (it == rec.channels.end()) continue;
                        if (auto px = em_to_px(it->second, font)) it->second = *px;
                    }
                }
                rec.extent = mark_extent(view.mark, rec);
            }
        }
    }

    ExecutionResult run() {
        apply_plan(db, graph.prep);
        for (int id : graph.order) {
            const Task& task = graph.nodes[id];
            switch (task.kind) {
                case Task::Kind::Transform:
                    break;  // applied up front, in plan order
                case Task::Kind::TrainScale:
                    run_train_scale(task.detail);
                    break;
                case Task::Kind::InstantiateMarks:
                    run_instantiate(task.view);
                    break;
                case Task::Kind::ResolveForeign: {
                    const ViewInfo& info = plan.views.at(task.view);
                    for (const auto& r : info.refs)
                        if (ref_detail(*r) == task.detail) run_resolve(task.view, *r);
                    break;
                }
                case Task::Kind::RunLayout: {
                    const ViewInfo& info = plan.views.at(task.view);
                    for (const auto& l : info.layout_uses)
                        if (l->name == task.detail) run_layout_task(task.view, *l);
                    break;
                }
                case Task::Kind::NestExtents: {
                    const ViewInfo& info = plan.views.at(task.view);
                    run_nest(task.view, *info.nest);
                    break;
                }
                case Task::Kind::Render:
                    finalize();
                    break;
            }
        }
        result.prepared = std::move(db);
        return std::move(result);
    }
};

} // namespace

ExecutionResult execute(const TaskGraph& graph, const Database& db) {
    Exec exec(graph, db);
    return exec.run();
}

namespace {

json value_as_json(const Value& v) {
    if (is_null(v)) return nullptr;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* i = std::get_if<int64_t>(&v)) return *i;
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

} // namespace

std::string marks_to_json(const ExecutionResult& result) {
    json views = json::array();
    for (const auto& vname : result.view_order) {
        const MarkTable& mt = result.marks.at(vname);
        json vj;
        vj["name"] = mt.view;
        vj["mark"] = mark_name(mt.mark);
        vj["table"] = mt.table;
        vj["extent"] = {mt.view_extent.x, mt.view_extent.y, mt.view_extent.w, mt.view_extent.h};
        json records = json::array();
        for (const auto& rec : mt.records) {
            json rj;
            json key = json::array();
            for (const auto& v : rec.key) key.push_back(value_as_json(v));
            rj["key"] = std::move(key);
            json channels;
            for (const auto& [ch, v] : rec.channels) channels[ch] = value_as_json(v);
            rj["channels"] = std::move(channels);
            rj["extent"] = {rec.extent.x, rec.extent.y, rec.extent.w, rec.extent.h};
            records.push_back(std::move(rj));
        }
        vj["records"] = std::move(records);
        views.push_back(std::move(vj));
    }
    json j;
    j["views"] = std::move(views);
    return j.dump(2) + "\n";
}

} // namespace dvl
