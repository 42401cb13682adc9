#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace xtq::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
    std::optional<double> hline;  // dashed reference level
    std::string hline_label;
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
    return colors[i % 7];
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double t(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return hi > lo ? (t(v) - lo) / (hi - lo) : 0.5; }
};

inline Axis make_axis(std::vector<double> vals, bool log) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : vals) {
        if (log && !(v > 0.0)) continue;
        lo = std::min(lo, a.t(v));
        hi = std::max(hi, a.t(v));
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    a.lo = lo - pad;
    a.hi = hi + pad;
    return a;
}

}  // namespace detail

inline constexpr int kWidth = 720;
inline constexpr int kHeight = 480;
inline constexpr int kMargin = 70;

/// Self-contained SVG line chart.
inline std::string render(const LinePlot& plot) {
    using namespace detail;
    std::vector<double> xs, ys;
    for (const auto& s : plot.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    if (plot.hline) ys.push_back(*plot.hline);
    const Axis ax = make_axis(xs, plot.log_x);
    const Axis ay = make_axis(ys, plot.log_y);
    const double w = kWidth - 2 * kMargin;
    const double h = kHeight - 2 * kMargin;
    auto px = [&](double v) { return kMargin + ax.frac(v) * w; };
    auto py = [&](double v) { return kHeight - kMargin - ay.frac(v) * h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        const double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        const double vx = ax.log ? std::pow(10.0, fx) : fx;
        const double vy = ay.log ? std::pow(10.0, fy) : fy;
        out << "<text x=\"" << num(kMargin + w * i / 4.0) << "\" y=\"" << kHeight - kMargin + 18
            << "\" text-anchor=\"middle\">" << num(vx) << "</text>\n";
        out << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(kHeight - kMargin - h * i / 4.0 + 4)
            << "\" text-anchor=\"end\">" << num(vy) << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">" << escape(plot.x_label)
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kHeight / 2
        << ")\">" << escape(plot.y_label) << "</text>\n";
    if (plot.hline) {
        out << "<line x1=\"" << kMargin << "\" x2=\"" << kMargin + w << "\" y1=\"" << num(py(*plot.hline)) << "\" y2=\""
            << num(py(*plot.hline)) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
        out << "<text x=\"" << kMargin + w - 4 << "\" y=\"" << num(py(*plot.hline) - 4) << "\" text-anchor=\"end\" fill=\"#d62728\">"
            << escape(plot.hline_label) << "</text>\n";
    }
    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto& s = plot.series[si];
        out << "<polyline fill=\"none\" stroke=\"" << palette(si) << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if ((plot.log_x && !(s.x[i] > 0.0)) || (plot.log_y && !(s.y[i] > 0.0))) continue;
            out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << kMargin + 8 << "\" y=\"" << kMargin + 16 + 16 * si << "\" fill=\"" << palette(si) << "\">"
            << escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

struct StripPoint {
    double value = 0.0;
    int group = 0;  // color index, e.g. quartile - 1
    std::string label;
};

/// One-dimensional beeswarm: points stacked vertically where they would overlap.
inline std::string render_strip(const std::string& title, const std::string& x_label, std::vector<StripPoint> points) {
    using namespace detail;
    std::vector<double> xs;
    for (const auto& p : points) xs.push_back(p.value);
    const Axis ax = make_axis(xs, false);
    const double w = kWidth - 2 * kMargin;
    const double mid = kHeight / 2.0;
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
    out << "<line x1=\"" << kMargin << "\" x2=\"" << kMargin + w << "\" y1=\"" << kHeight - kMargin << "\" y2=\""
        << kHeight - kMargin << "\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        out << "<text x=\"" << num(kMargin + w * i / 4.0) << "\" y=\"" << kHeight - kMargin + 18 << "\" text-anchor=\"middle\">"
            << num(v) << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
    std::vector<std::pair<double, double>> placed;
    constexpr double r = 5.0;
    for (const auto& p : points) {
        const double x = kMargin + ax.frac(p.value) * w;
        double y = mid;
        for (int k = 1; k < 200; ++k) {
            bool clash = false;
            for (const auto& [qx, qy] : placed) {
                if ((qx - x) * (qx - x) + (qy - y) * (qy - y) < 4 * r * r) {
                    clash = true;
                    break;
                }
            }
            if (!clash) break;
            y = mid + ((k % 2) ? 1 : -1) * ((k + 1) / 2) * 2 * r;
        }
        placed.emplace_back(x, y);
        out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << r << "\" fill=\"" << palette(p.group)
            << "\"><title>" << escape(p.label) << ' ' << num(p.value) << "</title></circle>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace xtq::svg
