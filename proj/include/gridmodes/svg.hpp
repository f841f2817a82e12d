#pragma once

// Self-contained SVG line plots (no plotting dependency): axes, tick labels,
// one polyline per series, optional point markers. Output is deterministic;
// tests compare path data textually.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace gridmodes {

class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y) {
        series_.push_back({std::move(name), std::move(x), std::move(y)});
    }

    void add_marker(double x, double y, std::string label = {}) {
        markers_.push_back({x, y, std::move(label)});
    }

    std::string render() const {
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& s : series_) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                xmin = std::min(xmin, s.x[i]); xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]); ymax = std::max(ymax, s.y[i]);
            }
        }
        for (const auto& m : markers_) {
            xmin = std::min(xmin, m.x); xmax = std::max(xmax, m.x);
            ymin = std::min(ymin, m.y); ymax = std::max(ymax, m.y);
        }
        if (!(xmin < xmax)) { xmin -= 1.0; xmax += 1.0; }
        if (!(ymin < ymax)) { ymin -= 1.0; ymax += 1.0; }
        const double xpad = 0.02 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
        xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

        auto px = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * kPlotW; };
        auto py = [&](double y) { return kMargin + kPlotH - (y - ymin) / (ymax - ymin) * kPlotH; };

        std::string svg;
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                      "viewBox=\"0 0 %g %g\">\n",
                      kMargin * 2 + kPlotW, kMargin * 2 + kPlotH, kMargin * 2 + kPlotW,
                      kMargin * 2 + kPlotH);
        svg += buf;
        svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      kMargin + kPlotW / 2, title_.c_str());
        svg += buf;
        // frame
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
                      "stroke=\"black\" stroke-width=\"1\"/>\n",
                      kMargin, kMargin, kPlotW, kPlotH);
        svg += buf;
        // ticks
        for (int t = 0; t <= kTicks; ++t) {
            const double fx = xmin + (xmax - xmin) * t / kTicks;
            const double fy = ymin + (ymax - ymin) * t / kTicks;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\" "
                          "text-anchor=\"middle\">%.5g</text>\n",
                          px(fx), kMargin + kPlotH + 14, fx);
            svg += buf;
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\" "
                          "text-anchor=\"end\">%.5g</text>\n",
                          kMargin - 4, py(fy) + 3, fy);
            svg += buf;
        }
        // zero line when visible
        if (ymin < 0.0 && ymax > 0.0) {
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#999\" "
                          "stroke-dasharray=\"4 3\"/>\n",
                          kMargin, py(0.0), kMargin + kPlotW, py(0.0));
            svg += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      kMargin + kPlotW / 2, kMargin + kPlotH + 32, x_label_.c_str());
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"14\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"middle\" transform=\"rotate(-90 14 %g)\">%s</text>\n",
                      kMargin + kPlotH / 2, kMargin + kPlotH / 2, y_label_.c_str());
        svg += buf;

        int color_idx = 0;
        for (const auto& s : series_) {
            std::string d;
            bool pen_down = false;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) { pen_down = false; continue; }
                std::snprintf(buf, sizeof(buf), "%c%.2f %.2f ", pen_down ? 'L' : 'M', px(s.x[i]),
                              py(s.y[i]));
                d += buf;
                pen_down = true;
            }
            const char* color = kPalette[color_idx % kPaletteSize];
            std::snprintf(buf, sizeof(buf),
                          "<path d=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.2\"><title>"
                          "%s</title></path>\n",
                          d.c_str(), color, s.name.c_str());
            svg += buf;
            ++color_idx;
        }
        for (const auto& m : markers_) {
            std::snprintf(buf, sizeof(buf),
                          "<path d=\"M%.2f %.2f l-5 -5 l10 10 m-10 0 l10 -10\" stroke=\"red\" "
                          "stroke-width=\"1.5\" fill=\"none\"/>\n",
                          px(m.x), py(m.y));
            svg += buf;
            if (!m.label.empty()) {
                std::snprintf(buf, sizeof(buf),
                              "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"10\" "
                              "fill=\"red\">%s</text>\n",
                              px(m.x) + 7, py(m.y) - 7, m.label.c_str());
                svg += buf;
            }
        }
        svg += "</svg>\n";
        return svg;
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };
    struct Marker {
        double x, y;
        std::string label;
    };

    static constexpr double kMargin = 56.0;
    static constexpr double kPlotW = 640.0;
    static constexpr double kPlotH = 400.0;
    static constexpr int kTicks = 5;
    static constexpr int kPaletteSize = 8;
    static constexpr const char* kPalette[kPaletteSize] = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
        "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    std::vector<Marker> markers_;
};

} // namespace gridmodes
