#include "dvl/specmodel.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "dvl/expr.hpp"
#include "dvl/layouts.hpp"
#include "dvl/resolver.hpp"

namespace dvl {

using json = nlohmann::json;

// ---- enum tables --------------------------------------------------------------

MarkType mark_from_name(const std::string& name) {
    if (name == "point" || name == "dot") return MarkType::Point;
    if (name == "rect") return MarkType::Rect;
    if (name == "square") return MarkType::Square;
    if (name == "link") return MarkType::Link;
    if (name == "label") return MarkType::Label;
    if (name == "text") return MarkType::Text;
    throw Error("unknown mark type '" + name + "'");
}

std::string mark_name(MarkType m) {
    switch (m) {
        case MarkType::Point: return "point";
        case MarkType::Rect: return "rect";
        case MarkType::Square: return "square";
        case MarkType::Link: return "link";
        case MarkType::Label: return "label";
        case MarkType::Text: return "text";
    }
    return "point";
}

const std::vector<std::string>& channels_for(MarkType m) {
    static const std::vector<std::string> point = {"x", "y", "r", "color", "symbol"};
    static const std::vector<std::string> rect = {"x", "y", "w", "h", "color",
                                                  "stroke", "strokeWidth", "fill", "opacity"};
    static const std::vector<std::string> link = {"x1", "y1", "x2", "y2",
                                                  "stroke", "strokeWidth", "opacity", "curve"};
    static const std::vector<std::string> label = {"x", "y", "text", "fontSize", "dx", "dy",
                                                   "textDecoration", "w", "h"};
    switch (m) {
        case MarkType::Point: return point;
        case MarkType::Rect:
        case MarkType::Square: return rect;
        case MarkType::Link: return link;
        case MarkType::Label:
        case MarkType::Text: return label;
    }
    return point;
}

ScaleKind scale_kind_from_name(const std::string& name) {
    if (name == "linear") return ScaleKind::Linear;
    if (name == "ordinal") return ScaleKind::Ordinal;
    if (name == "identity") return ScaleKind::Identity;
    throw Error("unknown scale kind '" + name + "'");
}

std::string scale_kind_name(ScaleKind k) {
    switch (k) {
        case ScaleKind::Linear: return "linear";
        case ScaleKind::Ordinal: return "ordinal";
        case ScaleKind::Identity: return "identity";
    }
    return "linear";
}

LayoutAlgo layout_algo_from_name(const std::string& name) {
    if (name == "SQ") return LayoutAlgo::SQ;
    if (name == "OS") return LayoutAlgo::OS;
    if (name == "VT") return LayoutAlgo::VT;
    if (name == "HZ") return LayoutAlgo::HZ;
    if (name == "EQ") return LayoutAlgo::EQ;
    if (name == "tree") return LayoutAlgo::Tree;
    if (name == "force") return LayoutAlgo::Force;
    throw Error("unknown layout algorithm '" + name + "'");
}

std::string layout_algo_name(LayoutAlgo a) {
    switch (a) {
        case LayoutAlgo::SQ: return "SQ";
        case LayoutAlgo::OS: return "OS";
        case LayoutAlgo::VT: return "VT";
        case LayoutAlgo::HZ: return "HZ";
        case LayoutAlgo::EQ: return "EQ";
        case LayoutAlgo::Tree: return "tree";
        case LayoutAlgo::Force: return "force";
    }
    return "SQ";
}

const std::vector<std::string>& layout_outputs(LayoutAlgo a) {
    static const std::vector<std::string> rect = {"x", "y", "w", "h"};
    static const std::vector<std::string> pos = {"x", "y"};
    switch (a) {
        case LayoutAlgo::Tree:
        case LayoutAlgo::Force: return pos;
        default: return rect;
    }
}

bool Encoding::operator==(const Encoding& o) const {
    if (kind != o.kind || field != o.field || scale != o.scale || expr != o.expr)
        return false;
    if (!value_equals(constant, o.constant)) return false;
    if ((ref == nullptr) != (o.ref == nullptr)) return false;
    if (ref && !(*ref == *o.ref)) return false;
    if ((layout == nullptr) != (o.layout == nullptr)) return false;
    if (layout && !(*layout == *o.layout)) return false;
    return true;
}

const ViewSpec* PlotSpec::find_view(const std::string& name) const {
    for (const auto& v : views)
        if (v.name == name) return &v;
    return nullptr;
}

// ---- parse ----------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw Error("spec error at " + (path.empty() ? "/" : path) + ": " + msg);
}

void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) fail(path + "/" + it.key(), "unknown field");
    }
}

Value value_from_json(const json& j, const std::string& path) {
    if (j.is_null()) return {};
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    fail(path, "scalar expected");
}

json value_to_json(const Value& v) {
    if (is_null(v)) return nullptr;
    if (auto* b = std::get_if<bool>(&v)) return *b;
    if (auto* i = std::get_if<int64_t>(&v)) return *i;
    if (auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

std::shared_ptr<ForeignRefSpec> parse_ref(const json& j, const std::string& path,
                                          const std::string& channel) {
    if (!j.is_object()) fail(path, "object expected");
    expect_keys(j, path, {"view", "filter", "props", "agg"});
    auto ref = std::make_shared<ForeignRefSpec>();
    if (!j.contains("view")) fail(path, "missing 'view'");
    ref->view = j.at("view").get<std::string>();

    if (!j.contains("filter") || j.at("filter").is_null()) {
        ref->filter_kind = ForeignRefSpec::Filter::All;
    } else if (j.at("filter").is_array()) {
        ref->filter_kind = ForeignRefSpec::Filter::SourceAttrs;
        for (const auto& a : j.at("filter")) {
            if (!a.is_string()) fail(path + "/filter", "attribute names expected");
            ref->filter_attrs.push_back(a.get<std::string>());
        }
        if (ref->filter_attrs.empty()) fail(path + "/filter", "empty attribute list");
    } else if (j.at("filter").is_object()) {
        ref->filter_kind = ForeignRefSpec::Filter::Predicate;
        for (auto it = j.at("filter").begin(); it != j.at("filter").end(); ++it)
            ref->predicate.emplace_back(it.key(),
                                        value_from_json(it.value(), path + "/filter/" + it.key()));
        if (ref->predicate.empty()) fail(path + "/filter", "empty predicate");
    } else {
        fail(path + "/filter", "expected attribute list, predicate object, or null");
    }

    if (j.contains("props")) {
        const json& p = j.at("props");
        if (p.is_string()) {
            ref->props.emplace_back(channel, p.get<std::string>());
        } else if (p.is_array()) {
            for (const auto& name : p) {
                if (!name.is_string()) fail(path + "/props", "prop names expected");
                ref->props.emplace_back(name.get<std::string>(), name.get<std::string>());
            }
        } else if (p.is_object()) {
            for (auto it = p.begin(); it != p.end(); ++it) {
                if (!it.value().is_string()) fail(path + "/props/" + it.key(), "string expected");
                ref->props.emplace_back(it.key(), it.value().get<std::string>());
            }
        } else {
            fail(path + "/props", "expected string, list, or channel map");
        }
    }

    if (j.contains("agg")) {
        const json& a = j.at("agg");
        expect_keys(a, path + "/agg", {"op", "over"});
        RefAgg agg;
        agg.op = agg_from_name(a.at("op").get<std::string>());
        if (agg.op == AggOp::Avg) fail(path + "/agg", "avg is not a reference reducer");
        if (a.contains("over")) agg.over = a.at("over").get<std::string>();
        if (agg.op != AggOp::Count && agg.over.empty())
            fail(path + "/agg", agg_name(agg.op) + " requires 'over'");
        ref->agg = agg;
    }
    if (!ref->agg && ref->props.empty())
        fail(path, "non-aggregating reference requires 'props'");
    if (!ref->agg && ref->filter_kind == ForeignRefSpec::Filter::All)
        fail(path, "filter 'null' (all marks) requires an aggregate");
    try {
        for (const auto& [ch, expr] : ref->props) Expr::parse(expr);
        if (ref->agg && !ref->agg->over.empty()) Expr::parse(ref->agg->over);
    } catch (const Error& err) {
        fail(path, err.what());
    }
    return ref;
}

Encoding parse_encoding(const json& j, const std::string& path, const std::string& channel) {
    if (!j.is_object()) fail(path, "encoding object expected");
    int forms = int(j.contains("field")) + int(j.contains("const")) + int(j.contains("expr")) +
                int(j.contains("ref")) + int(j.contains("layout"));
    if (forms != 1)
        fail(path, "exactly one of field/const/expr/ref/layout expected");
    Encoding e;
    if (j.contains("field")) {
        expect_keys(j, path, {"field", "scale"});
        e.kind = Encoding::Kind::Field;
        e.field = j.at("field").get<std::string>();
        if (j.contains("scale")) e.scale = j.at("scale").get<std::string>();
    } else if (j.contains("const")) {
        expect_keys(j, path, {"const"});
        e.kind = Encoding::Kind::Const;
        e.constant = value_from_json(j.at("const"), path + "/const");
    } else if (j.contains("expr")) {
        expect_keys(j, path, {"expr"});
        e.kind = Encoding::Kind::Expression;
        e.expr = j.at("expr").get<std::string>();
        try {
            Expr::parse(e.expr);
        } catch (const Error& err) {
            fail(path + "/expr", err.what());
        }
    } else if (j.contains("ref")) {
        expect_keys(j, path, {"ref"});
        e.kind = Encoding::Kind::Ref;
        e.ref = parse_ref(j.at("ref"), path + "/ref", channel);
    } else {
        expect_keys(j, path, {"layout", "channels"});
        e.kind = Encoding::Kind::Layout;
        auto use = std::make_shared<LayoutUse>();
        use->name = j.at("layout").get<std::string>();
        if (!j.contains("channels")) fail(path, "layout encoding requires 'channels'");
        use->channels = j.at("channels").get<std::vector<std::string>>();
        e.layout = use;
    }
    return e;
}

/// Channels a multi-channel encoding claims beyond its own slot.
std::vector<std::string> covered_channels(const Encoding& e, const std::string& own) {
    std::vector<std::string> out;
    if (e.kind == Encoding::Kind::Ref && !e.ref->agg)
        for (const auto& [ch, _] : e.ref->props) out.push_back(ch);
    else if (e.kind == Encoding::Kind::Layout)
        out = e.layout->channels;
    if (out.empty()) out.push_back(own);
    return out;
}

ViewSpec parse_view(const json& j, const std::string& path) {
    expect_keys(j, path, {"name", "table", "mark", "encodings"});
    ViewSpec v;
    if (!j.contains("name")) fail(path, "missing 'name'");
    if (!j.contains("table")) fail(path, "missing 'table'");
    if (!j.contains("mark")) fail(path, "missing 'mark'");
    v.name = j.at("name").get<std::string>();
    v.table = j.at("table").get<std::string>();
    try {
        v.mark = mark_from_name(j.at("mark").get<std::string>());
    } catch (const Error& err) {
        fail(path + "/mark", err.what());
    }
    const auto& legal = channels_for(v.mark);
    if (j.contains("encodings")) {
        for (auto it = j.at("encodings").begin(); it != j.at("encodings").end(); ++it) {
            const std::string& channel = it.key();
            std::string epath = path + "/encodings/" + channel;
            if (std::find(legal.begin(), legal.end(), channel) == legal.end())
                fail(epath, "channel not valid for mark '" + mark_name(v.mark) + "'");
            Encoding e = parse_encoding(it.value(), epath, channel);
            for (const auto& ch : covered_channels(e, channel)) {
                if (std::find(legal.begin(), legal.end(), ch) == legal.end())
                    fail(epath, "covered channel '" + ch + "' not valid for mark");
                auto [pos, inserted] = v.encodings.try_emplace(ch, e);
                if (!inserted && !(pos->second == e))
                    fail(epath, "channel '" + ch + "' already has an encoding");
            }
        }
    }
    return v;
}

NestDecl parse_nest(const json& j, const std::string& path) {
    expect_keys(j, path, {"child", "children", "parent", "using", "by"});
    NestDecl n;
    if (!j.contains("parent")) fail(path, "missing 'parent'");
    n.parent = j.at("parent").get<std::string>();
    if (j.contains("child") == j.contains("children"))
        fail(path, "exactly one of 'child'/'children' expected");
    if (j.contains("child")) {
        n.child = j.at("child").get<std::string>();
        if (j.contains("by")) fail(path + "/by", "'by' requires 'children'");
        if (j.contains("using")) {
            const json& u = j.at("using");
            if (u.is_string()) {
                n.using_constraint = u.get<std::string>();
            } else if (u.is_array()) {
                for (const auto& pair : u) {
                    if (!pair.is_array() || pair.size() != 2)
                        fail(path + "/using", "expected [child attr, parent attr] pairs");
                    n.using_pairs.emplace_back(pair[0].get<std::string>(),
                                               pair[1].get<std::string>());
                }
                if (n.using_pairs.empty()) fail(path + "/using", "empty pair list");
            } else {
                fail(path + "/using", "constraint name or attribute pairs expected");
            }
        }
    } else {
        n.children = j.at("children").get<std::vector<std::string>>();
        if (j.contains("using")) fail(path + "/using", "'using' requires 'child'");
        if (!j.contains("by")) fail(path, "'children' requires 'by'");
        const json& by = j.at("by");
        expect_keys(by, path + "/by", {"attr", "map"});
        n.by_attr = by.at("attr").get<std::string>();
        for (auto it = by.at("map").begin(); it != by.at("map").end(); ++it)
            n.by_map.emplace(it.key(), it.value().get<std::string>());
    }
    return n;
}

ScaleSpec parse_scale(const json& j, const std::string& path, const std::string& name) {
    expect_keys(j, path, {"type", "domain", "range"});
    ScaleSpec s;
    s.name = name;
    if (!j.contains("type")) fail(path, "missing 'type'");
    try {
        s.kind = scale_kind_from_name(j.at("type").get<std::string>());
    } catch (const Error& err) {
        fail(path + "/type", err.what());
    }
    if (j.contains("domain")) {
        std::vector<Value> dom;
        for (const auto& v : j.at("domain")) dom.push_back(value_from_json(v, path + "/domain"));
        s.domain = dom;
    }
    if (j.contains("range")) {
        const json& r = j.at("range");
        if (!r.is_array() || r.size() != 2) fail(path + "/range", "[lo, hi] expected");
        s.range = std::make_pair(r[0].get<double>(), r[1].get<double>());
    }
    return s;
}

LayoutBinding parse_layout(const json& j, const std::string& path, const std::string& name) {
    expect_keys(j, path,
                {"algo", "weight", "cols", "child", "parent", "edges", "seed", "iterations"});
    LayoutBinding b;
    b.name = name;
    if (!j.contains("algo")) fail(path, "missing 'algo'");
    try {
        b.algo = layout_algo_from_name(j.at("algo").get<std::string>());
    } catch (const Error& err) {
        fail(path + "/algo", err.what());
    }
    if (j.contains("weight")) {
        if (j.at("weight").is_string()) b.weight_attr = j.at("weight").get<std::string>();
        else if (j.at("weight").is_number()) b.weight_const = j.at("weight").get<double>();
        else fail(path + "/weight", "attribute name or number expected");
    }
    if (j.contains("cols")) b.cols = j.at("cols").get<int>();
    if (j.contains("child")) b.child_attr = j.at("child").get<std::string>();
    if (j.contains("parent")) b.parent_attr = j.at("parent").get<std::string>();
    if (j.contains("edges")) {
        const json& e = j.at("edges");
        expect_keys(e, path + "/edges", {"table", "src", "dst"});
        b.edges = EdgeSource{e.at("table").get<std::string>(), e.at("src").get<std::string>(),
                             e.at("dst").get<std::string>()};
    }
    if (j.contains("seed")) b.seed = j.at("seed").get<uint64_t>();
    if (j.contains("iterations")) b.iterations = j.at("iterations").get<int>();

    switch (b.algo) {
        case LayoutAlgo::Force:
            if (!b.edges) fail(path, "force requires 'edges'");
            if (!j.contains("seed")) fail(path, "force requires a 'seed'");
            break;
        case LayoutAlgo::Tree:
            if (b.child_attr.empty() || b.parent_attr.empty())
                fail(path, "tree requires 'child' and 'parent' attributes");
            break;
        default:
            break;
    }
    return b;
}

} // namespace

PlotSpec parse_spec(const std::string& document) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::exception& e) {
        throw Error(std::string("spec: invalid json: ") + e.what());
    }
    if (!j.is_object()) fail("", "object expected");
    expect_keys(j, "", {"width", "height", "views", "nests", "scales", "layouts"});

    PlotSpec spec;
    if (j.contains("width")) spec.width = j.at("width").get<double>();
    if (j.contains("height")) spec.height = j.at("height").get<double>();
    if (spec.width <= 0 || spec.height <= 0) fail("/width", "plot extent must be positive");

    if (j.contains("views")) {
        size_t i = 0;
        for (const auto& vj : j.at("views")) {
            ViewSpec v = parse_view(vj, "/views/" + std::to_string(i));
            if (spec.find_view(v.name))
                fail("/views/" + std::to_string(i) + "/name", "duplicate view '" + v.name + "'");
            spec.views.push_back(std::move(v));
            ++i;
        }
    }
    if (j.contains("nests")) {
        size_t i = 0;
        for (const auto& nj : j.at("nests"))
            spec.nests.push_back(parse_nest(nj, "/nests/" + std::to_string(i++)));
    }
    if (j.contains("scales"))
        for (auto it = j.at("scales").begin(); it != j.at("scales").end(); ++it)
            spec.scales.emplace(it.key(),
                                parse_scale(it.value(), "/scales/" + it.key(), it.key()));
    if (j.contains("layouts"))
        for (auto it = j.at("layouts").begin(); it != j.at("layouts").end(); ++it)
            spec.layouts.emplace(it.key(),
                                 parse_layout(it.value(), "/layouts/" + it.key(), it.key()));
    return spec;
}

// ---- serialize ------------------------------------------------------------------

namespace {

json ref_to_json(const ForeignRefSpec& ref, const std::string& own_channel) {
    json j;
    j["view"] = ref.view;
    switch (ref.filter_kind) {
        case ForeignRefSpec::Filter::All:
            j["filter"] = nullptr;
            break;
        case ForeignRefSpec::Filter::SourceAttrs:
            j["filter"] = ref.filter_attrs;
            break;
        case ForeignRefSpec::Filter::Predicate: {
            json p;
            for (const auto& [col, v] : ref.predicate) p[col] = value_to_json(v);
            j["filter"] = p;
            break;
        }
    }
    if (!ref.props.empty()) {
        bool identity = std::all_of(ref.props.begin(), ref.props.end(),
                                    [](const auto& p) { return p.first == p.second; });
        if (ref.props.size() == 1 && ref.props[0].first == own_channel && !identity) {
            j["props"] = ref.props[0].second;
        } else if (identity && ref.props.size() > 1) {
            json arr = json::array();
            for (const auto& [ch, _] : ref.props) arr.push_back(ch);
            j["props"] = arr;
        } else {
            json p;
            for (const auto& [ch, prop] : ref.props) p[ch] = prop;
            j["props"] = p;
        }
    }
    if (ref.agg) {
        json a;
        a["op"] = agg_name(ref.agg->op);
        if (!ref.agg->over.empty()) a["over"] = ref.agg->over;
        j["agg"] = a;
    }
    return j;
}

json encoding_to_json(const Encoding& e, const std::string& channel) {
    json j;
    switch (e.kind) {
        case Encoding::Kind::Field:
            j["field"] = e.field;
            if (!e.scale.empty()) j["scale"] = e.scale;
            break;
        case Encoding::Kind::Const:
            j["const"] = value_to_json(e.constant);
            break;
        case Encoding::Kind::Expression:
            j["expr"] = e.expr;
            break;
        case Encoding::Kind::Ref:
            j["ref"] = ref_to_json(*e.ref, channel);
            break;
        case Encoding::Kind::Layout:
            j["layout"] = e.layout->name;
            j["channels"] = e.layout->channels;
            break;
    }
    return j;
}

} // namespace

std::string serialize_spec(const PlotSpec& spec) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    json views = json::array();
    for (const auto& v : spec.views) {
        json vj;
        vj["name"] = v.name;
        vj["table"] = v.table;
        vj["mark"] = mark_name(v.mark);
        json enc;
        std::set<const void*> emitted;
        for (const auto& [channel, e] : v.encodings) {
            // multi-channel groups serialize once, under their first channel
            const void* group = e.kind == Encoding::Kind::Ref ? (const void*)e.ref.get()
                             : e.kind == Encoding::Kind::Layout ? (const void*)e.layout.get()
                                                                : (const void*)nullptr;
            if (group && !emitted.insert(group).second) continue;
            enc[channel] = encoding_to_json(e, channel);
        }
        if (!enc.empty()) vj["encodings"] = enc;
        views.push_back(std::move(vj));
    }
    if (!views.empty()) j["views"] = std::move(views);
    if (!spec.nests.empty()) {
        json nests = json::array();
        for (const auto& n : spec.nests) {
            json nj;
            nj["parent"] = n.parent;
            if (!n.is_selector()) {
                nj["child"] = n.child;
                if (n.using_constraint) nj["using"] = *n.using_constraint;
                else if (!n.using_pairs.empty()) nj["using"] = n.using_pairs;
            } else {
                nj["children"] = n.children;
                json by;
                by["attr"] = n.by_attr;
                by["map"] = n.by_map;
                nj["by"] = by;
            }
            nests.push_back(std::move(nj));
        }
        j["nests"] = std::move(nests);
    }
    if (!spec.scales.empty()) {
        json scales;
        for (const auto& [name, s] : spec.scales) {
            json sj;
            sj["type"] = scale_kind_name(s.kind);
            if (s.domain) {
                json dom = json::array();
                for (const auto& v : *s.domain) dom.push_back(value_to_json(v));
                sj["domain"] = dom;
            }
            if (s.range) sj["range"] = {s.range->first, s.range->second};
            scales[name] = std::move(sj);
        }
        j["scales"] = std::move(scales);
    }
    if (!spec.layouts.empty()) {
        json layouts;
        for (const auto& [name, b] : spec.layouts) {
            json bj;
            bj["algo"] = layout_algo_name(b.algo);
            switch (b.algo) {
                case LayoutAlgo::SQ:
                case LayoutAlgo::OS:
                case LayoutAlgo::VT:
                case LayoutAlgo::HZ:
                    if (!b.weight_attr.empty()) bj["weight"] = b.weight_attr;
                    else bj["weight"] = b.weight_const;
                    break;
                case LayoutAlgo::EQ:
                    if (b.cols) bj["cols"] = *b.cols;
                    break;
                case LayoutAlgo::Tree:
                    bj["child"] = b.child_attr;
                    bj["parent"] = b.parent_attr;
                    break;
                case LayoutAlgo::Force: {
                    json e;
                    e["table"] = b.edges->table;
                    e["src"] = b.edges->src;
                    e["dst"] = b.edges->dst;
                    bj["edges"] = e;
                    bj["seed"] = b.seed;
                    bj["iterations"] = b.iterations;
                    break;
                }
            }
            layouts[name] = std::move(bj);
        }
        j["layouts"] = std::move(layouts);
    }
    return j.dump(2) + "\n";
}

// ---- validate --------------------------------------------------------------------

namespace {

void check_field_refs(std::vector<Diagnostic>& out, const Database& db, const ViewSpec& v) {
    const Table& t = db.table(v.table);
    for (const auto& [channel, e] : v.encodings) {
        std::string where = v.name + "." + channel;
        if (e.kind == Encoding::Kind::Field && !t.schema.has_attribute(e.field))
            out.push_back({where, "unknown attribute '" + e.field + "' in table '" + v.table + "'"});
        if (e.kind == Encoding::Kind::Expression) {
            Expr parsed = Expr::parse(e.expr);
            for (const auto& name : parsed.references())
                if (!t.schema.has_attribute(name))
                    out.push_back({where, "expression references unknown attribute '" + name + "'"});
        }
    }
}

void check_layout_use(std::vector<Diagnostic>& out, const Database& db, const PlotSpec& spec,
                      const ViewSpec& v) {
    std::map<std::string, std::set<std::string>> covered; // layout -> channels
    for (const auto& [channel, e] : v.encodings) {
        if (e.kind != Encoding::Kind::Layout) continue;
        std::string where = v.name + "." + channel;
        auto it = spec.layouts.find(e.layout->name);
        if (it == spec.layouts.end()) {
            out.push_back({where, "unknown layout '" + e.layout->name + "'"});
            continue;
        }
        if (covered[e.layout->name].insert(channel).second && covered[e.layout->name].size() == 1) {
            auto check = validate_layout_inputs(db, spec, v, it->second);
            if (!check.ok) out.push_back({where, check.message});
        }
    }
    for (const auto& [name, chans] : covered) {
        const auto& outputs = layout_outputs(spec.layouts.at(name).algo);
        std::set<std::string> want(outputs.begin(), outputs.end());
        if (chans != want) {
            std::string got;
            for (const auto& c : chans) got += (got.empty() ? "" : ",") + c;
            out.push_back({v.name, "layout '" + name + "' channels {" + got +
                                       "} must cover exactly its outputs"});
        }
    }
}

void check_nest(std::vector<Diagnostic>& out, const Database& db, const PlotSpec& spec,
                const NestDecl& n) {
    const ViewSpec* parent = spec.find_view(n.parent);
    if (!parent) {
        out.push_back({"nest", "unknown parent view '" + n.parent + "'"});
        return;
    }
    auto check_child = [&](const std::string& name) -> const ViewSpec* {
        const ViewSpec* child = spec.find_view(name);
        if (!child) out.push_back({"nest", "unknown child view '" + name + "'"});
        return child;
    };
    if (n.is_selector()) {
        for (const auto& c : n.children) check_child(c);
        if (db.has_table(parent->table) &&
            !db.table(parent->table).schema.has_attribute(n.by_attr))
            out.push_back({"nest", "selector attribute '" + n.by_attr + "' not in parent table"});
        for (const auto& [value, view] : n.by_map)
            if (std::find(n.children.begin(), n.children.end(), view) == n.children.end())
                out.push_back({"nest", "selector maps '" + value + "' to unlisted view '" + view + "'"});
        return;
    }
    const ViewSpec* child = check_child(n.child);
    if (!child || !db.has_table(child->table) || !db.has_table(parent->table)) return;
    if (n.using_constraint) {
        auto it = db.constraints.find(*n.using_constraint);
        if (it == db.constraints.end()) {
            out.push_back({"nest", "unknown constraint '" + *n.using_constraint + "'"});
        } else if (it->second.src_table != child->table || it->second.dst_table != parent->table) {
            out.push_back({"nest", "constraint '" + *n.using_constraint +
                                       "' does not relate child '" + child->table +
                                       "' to parent '" + parent->table + "'"});
        }
        return;
    }
    if (!n.using_pairs.empty()) {
        const Table& ct = db.table(child->table);
        const Table& pt = db.table(parent->table);
        for (const auto& [ca, pa] : n.using_pairs) {
            if (!ct.schema.has_attribute(ca))
                out.push_back({"nest", "child attribute '" + ca + "' not in '" + child->table + "'"});
            if (!pt.schema.has_attribute(pa))
                out.push_back({"nest", "parent attribute '" + pa + "' not in '" + parent->table + "'"});
        }
        return;
    }
    // No `using`: exactly one direct constraint must relate the tables.
    int found = 0;
    for (const auto& [name, fk] : db.constraints)
        if (fk.src_table == child->table && fk.dst_table == parent->table) ++found;
    if (found != 1)
        out.push_back({"nest", "nest of '" + n.child + "' in '" + n.parent + "' needs 'using': " +
                                   std::to_string(found) + " candidate constraints"});
}

} // namespace

std::vector<Diagnostic> validate_spec(const PlotSpec& spec, const Database& db) {
    std::vector<Diagnostic> out;
    for (const auto& v : spec.views) {
        if (!db.has_table(v.table)) {
            out.push_back({v.name, "unknown table '" + v.table + "'"});
            continue;
        }
        check_field_refs(out, db, v);
        std::set<const void*> seen_refs;
        for (const auto& [channel, e] : v.encodings) {
            std::string where = v.name + "." + channel;
            if (e.kind == Encoding::Kind::Field && !e.scale.empty() &&
                spec.scales.find(e.scale) == spec.scales.end())
                out.push_back({where, "unknown scale '" + e.scale + "'"});
            if (e.kind == Encoding::Kind::Ref && seen_refs.insert(e.ref.get()).second) {
                if (!spec.find_view(e.ref->view)) {
                    out.push_back({where, "unknown view '" + e.ref->view + "'"});
                    continue;
                }
                ResolveContext ctx{&db, &spec, {}};
                try {
                    validate_ref(ctx, v, *e.ref);
                } catch (const Error& err) {
                    out.push_back({where, err.what()});
                }
            }
        }
        check_layout_use(out, db, spec, v);
    }
    for (const auto& n : spec.nests) check_nest(out, db, spec, n);
    return out;
}

} // namespace dvl
