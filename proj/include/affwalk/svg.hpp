#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace affwalk {

// Minimal deterministic SVG plots: fixed canvas, no timestamps, fixed float
// formatting, so identical data gives identical bytes.

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_line(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
        if (!pts.empty()) series_.push_back({pts, color, true});
    }

    void add_points(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
        if (!pts.empty()) series_.push_back({pts, color, false});
    }

    /// Vertical whisker at x spanning [ylo, yhi].
    void add_whisker(double x, double ylo, double yhi, const std::string& color) {
        whiskers_.push_back({x, ylo, yhi, color});
    }

    void add_hline(double y, const std::string& color) { hlines_.push_back({y, color}); }

    /// Centered ellipse with half-axes (rx, ry), rotated by angle_deg.
    void add_ellipse(double cx, double cy, double rx, double ry, double angle_deg, const std::string& color) {
        ellipses_.push_back({cx, cy, rx, ry, angle_deg, color});
    }

    std::string render() const {
        double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
        auto eat = [&](double x, double y) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        };
        for (const auto& s : series_)
            for (auto [x, y] : s.pts) eat(x, y);
        for (const auto& w : whiskers_) {
            eat(w.x, w.lo);
            eat(w.x, w.hi);
        }
        for (const auto& h : hlines_) eat(xmin == 1e308 ? 0 : xmin, h.y);
        for (const auto& e : ellipses_) {
            double r = std::max(e.rx, e.ry);
            eat(e.cx - r, e.cy - r);
            eat(e.cx + r, e.cy + r);
        }
        if (xmin > xmax) {
            xmin = 0;
            xmax = 1;
        }
        if (ymin > ymax) {
            ymin = 0;
            ymax = 1;
        }
        if (xmax - xmin < 1e-300) {
            xmin -= 0.5;
            xmax += 0.5;
        }
        if (ymax - ymin < 1e-300) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
        xmin -= xpad;
        xmax += xpad;
        ymin -= ypad;
        ymax += ypad;

        const double w = 800, h = 500, ml = 70, mr = 20, mt = 40, mb = 55;
        auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
        auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

        std::string out;
        out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
        out += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
        out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">" +
               title_ + "</text>\n";
        // axes
        out += line(ml, h - mb, w - mr, h - mb, "black", 1.2);
        out += line(ml, mt, ml, h - mb, "black", 1.2);
        out += "<text x=\"" + num((ml + w - mr) / 2) + "\" y=\"" + num(h - 12) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">" + xlabel_ + "</text>\n";
        out += "<text x=\"18\" y=\"" + num((mt + h - mb) / 2) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 18 " +
               num((mt + h - mb) / 2) + ")\">" + ylabel_ + "</text>\n";
        // ticks
        for (int t = 0; t <= 5; ++t) {
            double xv = xmin + (xmax - xmin) * t / 5.0;
            double yv = ymin + (ymax - ymin) * t / 5.0;
            out += line(px(xv), h - mb, px(xv), h - mb + 5, "black", 1);
            out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(h - mb + 18) +
                   "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" + num(xv) + "</text>\n";
            out += line(ml - 5, py(yv), ml, py(yv), "black", 1);
            out += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py(yv) + 4) +
                   "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">" + num(yv) + "</text>\n";
        }
        for (const auto& hl : hlines_)
            out += line(ml, py(hl.y), w - mr, py(hl.y), hl.color, 1.0, "4,3");
        for (const auto& e : ellipses_) {
            out += "<ellipse cx=\"" + num(px(e.cx)) + "\" cy=\"" + num(py(e.cy)) + "\" rx=\"" +
                   num(e.rx / (xmax - xmin) * (w - ml - mr)) + "\" ry=\"" + num(e.ry / (ymax - ymin) * (h - mt - mb)) +
                   "\" fill=\"none\" stroke=\"" + e.color + "\" stroke-width=\"1.5\" transform=\"rotate(" +
                   num(-e.angle_deg) + " " + num(px(e.cx)) + " " + num(py(e.cy)) + ")\"/>\n";
        }
        for (const auto& wk : whiskers_) {
            out += line(px(wk.x), py(wk.lo), px(wk.x), py(wk.hi), wk.color, 1.5);
            out += line(px(wk.x) - 4, py(wk.lo), px(wk.x) + 4, py(wk.lo), wk.color, 1.5);
            out += line(px(wk.x) - 4, py(wk.hi), px(wk.x) + 4, py(wk.hi), wk.color, 1.5);
        }
        for (const auto& s : series_) {
            if (s.line) {
                std::string poly = "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
                for (auto [x, y] : s.pts) poly += num(px(x)) + "," + num(py(y)) + " ";
                poly += "\"/>\n";
                out += poly;
            } else {
                for (auto [x, y] : s.pts)
                    out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"2.5\" fill=\"" + s.color +
                           "\"/>\n";
            }
        }
        out += "</svg>\n";
        return out;
    }

  private:
    struct Series {
        std::vector<std::pair<double, double>> pts;
        std::string color;
        bool line;
    };
    struct Whisker {
        double x, lo, hi;
        std::string color;
    };
    struct HLine {
        double y;
        std::string color;
    };
    struct Ellipse {
        double cx, cy, rx, ry, angle_deg;
        std::string color;
    };

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }

    static std::string line(double x1, double y1, double x2, double y2, const std::string& color, double width,
                            const std::string& dash = "") {
        std::string out = "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
                          num(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"";
        if (!dash.empty()) out += " stroke-dasharray=\"" + dash + "\"";
        out += "/>\n";
        return out;
    }

    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
    std::vector<Whisker> whiskers_;
    std::vector<HLine> hlines_;
    std::vector<Ellipse> ellipses_;
};

} // namespace affwalk
