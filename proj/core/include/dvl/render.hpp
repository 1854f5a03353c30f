#pragma once

#include <string>
#include <vector>

#include "dvl/compiler.hpp"

namespace dvl {

/// Flat drawing primitives in paint order, plus axes and color guides.
struct Scene {
    struct Circle {
        double cx, cy, r;
        std::string fill;
    };
    struct Rect {
        double x, y, w, h;
        std::string fill, stroke;
        double stroke_width = 0;
        double opacity = -1;  // < 0: omit
    };
    struct Line {
        double x1, y1, x2, y2;
        std::string stroke;
        double width;
        double opacity = -1;
        bool curved = false;
    };
    struct Text {
        double x, y;
        std::string content;
        double font_size;
        std::string fill;
        bool underline = false;
    };
    struct Tick {
        bool x_axis;       // tick on the x axis (vertical guide line at px)
        double px;         // position along the axis
        std::string label;
    };
    struct GuideStop {
        std::string color;
        std::string label;
    };

    double width = 0, height = 0;
    // per view, in declaration order
    struct Layer {
        std::string view;
        std::vector<Circle> circles;
        std::vector<Rect> rects;
        std::vector<Line> lines;
        std::vector<Text> texts;
    };
    std::vector<Layer> layers;
    std::vector<Tick> ticks;
    std::vector<GuideStop> guides;
};

/// Converts mark tables to primitives and derives axes from the trained
/// spatial scales (5 quantile ticks for linear, one per ordinal category).
Scene build_scene(const ExecutionResult& result, const PlotSpec& spec);

/// SVG 1.1, UTF-8, fixed attribute order, 3-decimal coordinates;
/// byte-identical across runs for identical scenes.
std::string render_svg(const Scene& scene);

} // namespace dvl
