#include "dvl/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace dvl {

namespace {

double num(const MarkRecord& rec, const char* ch, double fallback = 0) {
    auto it = rec.channels.find(ch);
    if (it == rec.channels.end()) return fallback;
    auto n = as_number(it->second);
    return n ? *n : fallback;
}

std::string str(const MarkRecord& rec, const char* ch, const std::string& fallback = "") {
    auto it = rec.channels.find(ch);
    if (it == rec.channels.end()) return fallback;
    return value_to_string(it->second);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    // normalize "-0.000"
    if (std::string(buf) == "-0.000") return "0.000";
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

Scene build_scene(const ExecutionResult& result, const PlotSpec& spec) {
    Scene scene;
    scene.width = spec.width;
    scene.height = spec.height;

    for (const auto& vname : result.view_order) {
        const MarkTable& mt = result.marks.at(vname);
        Scene::Layer layer;
        layer.view = vname;
        for (const auto& rec : mt.records) {
            switch (mt.mark) {
                case MarkType::Point:
                    layer.circles.push_back(
                        {num(rec, "x"), num(rec, "y"), num(rec, "r", 3), str(rec, "color", "black")});
                    break;
                case MarkType::Rect:
                case MarkType::Square: {
                    Scene::Rect r;
                    r.x = rec.extent.x;
                    r.y = rec.extent.y;
                    r.w = rec.extent.w;
                    r.h = rec.extent.h;
                    r.fill = str(rec, "fill", str(rec, "color", "none"));
                    r.stroke = str(rec, "stroke", "");
                    r.stroke_width = num(rec, "strokeWidth", r.stroke.empty() ? 0 : 1);
                    r.opacity = rec.channels.count("opacity") ? num(rec, "opacity") : -1;
                    layer.rects.push_back(r);
                    break;
                }
                case MarkType::Link: {
                    Scene::Line l;
                    l.x1 = num(rec, "x1");
                    l.y1 = num(rec, "y1");
                    l.x2 = num(rec, "x2");
                    l.y2 = num(rec, "y2");
                    l.stroke = str(rec, "stroke", "black");
                    l.width = num(rec, "strokeWidth", 1);
                    l.opacity = rec.channels.count("opacity") ? num(rec, "opacity") : -1;
                    auto cit = rec.channels.find("curve");
                    l.curved = cit != rec.channels.end() &&
                               std::holds_alternative<bool>(cit->second) &&
                               std::get<bool>(cit->second);
                    layer.lines.push_back(l);
                    break;
                }
                case MarkType::Label:
                case MarkType::Text: {
                    Scene::Text t;
                    t.x = num(rec, "x") + num(rec, "dx");
                    t.y = num(rec, "y") + num(rec, "dy");
                    t.content = str(rec, "text");
                    t.font_size = num(rec, "fontSize", 12);
                    t.fill = "black";
                    t.underline = str(rec, "textDecoration") == "underline";
                    layer.texts.push_back(t);
                    break;
                }
            }
        }
        scene.layers.push_back(std::move(layer));
    }

    // Axes: one tick set per distinct trained spatial scale instance on the
    // root x/y channels. Ticks at domain quantiles for linear scales, one per
    // category for ordinal scales.
    std::set<std::string> axis_done;
    for (const auto& inst : result.scale_instances) {
        bool xaxis = inst.channel == "x";
        bool yaxis = inst.channel == "y";
        if (!xaxis && !yaxis) continue;
        std::string key = (xaxis ? "x:" : "y:") +
                          (inst.scale_name.empty() ? inst.view + "." + inst.attr
                                                   : inst.scale_name);
        if (!axis_done.insert(key).second) continue;
        const Scale& s = inst.scale;
        if (!s.trained || !s.range_set) continue;
        if (s.kind == ScaleKind::Linear) {
            for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                double v = s.dmin + q * (s.dmax - s.dmin);
                scene.ticks.push_back({xaxis, s.apply(v), value_to_string(Value{v})});
            }
        } else if (s.kind == ScaleKind::Ordinal) {
            for (const auto& cat : s.categories)
                scene.ticks.push_back({xaxis, s.apply(cat), value_to_string(cat)});
        }
    }
    // Color guides: the two ramp endpoints per trained linear color scale.
    std::set<std::string> guide_done;
    for (const auto& inst : result.scale_instances) {
        if (inst.channel != "color" && inst.channel != "fill" && inst.channel != "stroke")
            continue;
        std::string key = inst.scale_name.empty() ? inst.view + "." + inst.attr : inst.scale_name;
        if (!guide_done.insert(key).second) continue;
        const Scale& s = inst.scale;
        if (s.kind == ScaleKind::Linear && s.trained) {
            scene.guides.push_back({ramp_color(0), value_to_string(Value{s.dmin})});
            scene.guides.push_back({ramp_color(1), value_to_string(Value{s.dmax})});
        }
    }
    return scene;
}

std::string render_svg(const Scene& scene) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt(scene.width) + "\" height=\"" + fmt(scene.height) + "\">\n";

    for (const auto& tick : scene.ticks) {
        // gridline plus label along the matching edge
        if (tick.x_axis) {
            out += "  <line x1=\"" + fmt(tick.px) + "\" y1=\"0.000\" x2=\"" + fmt(tick.px) +
                   "\" y2=\"" + fmt(scene.height) + "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
            out += "  <text x=\"" + fmt(tick.px) + "\" y=\"" + fmt(scene.height - 2) +
                   "\" font-size=\"9\" fill=\"#666666\">" + xml_escape(tick.label) + "</text>\n";
        } else {
            out += "  <line x1=\"0.000\" y1=\"" + fmt(tick.px) + "\" x2=\"" + fmt(scene.width) +
                   "\" y2=\"" + fmt(tick.px) + "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
            out += "  <text x=\"2.000\" y=\"" + fmt(tick.px) +
                   "\" font-size=\"9\" fill=\"#666666\">" + xml_escape(tick.label) + "</text>\n";
        }
    }
    for (size_t i = 0; i < scene.guides.size(); ++i) {
        const auto& stop = scene.guides[i];
        double y = 10 + 14 * static_cast<double>(i);
        out += "  <rect x=\"" + fmt(scene.width - 70) + "\" y=\"" + fmt(y) +
               "\" width=\"10.000\" height=\"10.000\" fill=\"" + stop.color + "\"/>\n";
        out += "  <text x=\"" + fmt(scene.width - 56) + "\" y=\"" + fmt(y + 9) +
               "\" font-size=\"9\" fill=\"#666666\">" + xml_escape(stop.label) + "</text>\n";
    }

    for (const auto& layer : scene.layers) {
        out += "  <g class=\"" + xml_escape(layer.view) + "\">\n";
        for (const auto& r : layer.rects) {
            out += "    <rect x=\"" + fmt(r.x) + "\" y=\"" + fmt(r.y) + "\" width=\"" +
                   fmt(std::max(r.w, 0.0)) + "\" height=\"" + fmt(std::max(r.h, 0.0)) +
                   "\" fill=\"" + xml_escape(r.fill) + "\"";
            if (!r.stroke.empty())
                out += " stroke=\"" + xml_escape(r.stroke) + "\" stroke-width=\"" +
                       fmt(r.stroke_width) + "\"";
            if (r.opacity >= 0) out += " opacity=\"" + fmt(r.opacity) + "\"";
            out += "/>\n";
        }
        for (const auto& l : layer.lines) {
            if (l.curved) {
                // cubic with control points at the horizontal midpoint
                double mx = (l.x1 + l.x2) / 2;
                out += "    <path d=\"M " + fmt(l.x1) + " " + fmt(l.y1) + " C " + fmt(mx) + " " +
                       fmt(l.y1) + ", " + fmt(mx) + " " + fmt(l.y2) + ", " + fmt(l.x2) + " " +
                       fmt(l.y2) + "\" fill=\"none\" stroke=\"" + xml_escape(l.stroke) +
                       "\" stroke-width=\"" + fmt(l.width) + "\"";
            } else {
                out += "    <line x1=\"" + fmt(l.x1) + "\" y1=\"" + fmt(l.y1) + "\" x2=\"" +
                       fmt(l.x2) + "\" y2=\"" + fmt(l.y2) + "\" stroke=\"" +
                       xml_escape(l.stroke) + "\" stroke-width=\"" + fmt(l.width) + "\"";
            }
            if (l.opacity >= 0) out += " opacity=\"" + fmt(l.opacity) + "\"";
            out += "/>\n";
        }
        for (const auto& c : layer.circles) {
            out += "    <circle cx=\"" + fmt(c.cx) + "\" cy=\"" + fmt(c.cy) + "\" r=\"" +
                   fmt(c.r) + "\" fill=\"" + xml_escape(c.fill) + "\"/>\n";
        }
        for (const auto& t : layer.texts) {
            out += "    <text x=\"" + fmt(t.x) + "\" y=\"" + fmt(t.y + t.font_size) +
                   "\" font-size=\"" + fmt(t.font_size) + "\" font-family=\"sans-serif\"" +
                   " fill=\"" + xml_escape(t.fill) + "\"";
            if (t.underline) out += " text-decoration=\"underline\"";
            out += ">" + xml_escape(t.content) + "</text>\n";
        }
        out += "  </g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace dvl
