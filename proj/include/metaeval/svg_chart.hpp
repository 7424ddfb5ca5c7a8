#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metaeval/errors.hpp"

namespace metaeval {

// One series with an optional shaded band (e.g. mean +/- std). band_low and
// band_high are absolute y values; leave them empty for no band.
struct LineBandChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band_low;
    std::vector<double> band_high;
    bool log_x = false;
};

// Labeled bars with an interval whisker per bar.
struct BarIntervalChart {
    std::string title;
    std::string y_label;
    std::vector<std::string> labels;
    std::vector<double> value;
    std::vector<double> lower;
    std::vector<double> upper;
};

// Sparse colored grid; cells carry a value mapped onto a diverging color
// scale plus a tooltip annotation.
struct HeatmapChart {
    struct Cell {
        std::size_t row = 0;
        std::size_t col = 0;
        double value = 0.0;
        std::string annotation;
    };
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> col_labels;
    std::vector<std::string> row_labels;
    std::vector<Cell> cells;
    double value_min = -1.0;
    double value_max = 1.0;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string num_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct Frame {
    double width = 720, height = 480;
    double left = 70, right = 30, top = 50, bottom = 60;
    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

inline void open_svg(std::string& s, double w, double h) {
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + coord(w) +
         "\" height=\"" + coord(h) + "\" viewBox=\"0 0 " + coord(w) + " " + coord(h) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + coord(w) + "\" height=\"" + coord(h) +
         "\" fill=\"white\"/>\n";
}

inline void title_and_axis_labels(std::string& s, const Frame& f, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    if (!title.empty())
        s += "<text x=\"" + coord(f.width / 2) +
             "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
             xml_escape(title) + "</text>\n";
    if (!x_label.empty())
        s += "<text x=\"" + coord(f.left + f.plot_w() / 2) + "\" y=\"" + coord(f.height - 14) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
             xml_escape(x_label) + "</text>\n";
    if (!y_label.empty())
        s += "<text x=\"18\" y=\"" + coord(f.top + f.plot_h() / 2) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
             "transform=\"rotate(-90 18 " +
             coord(f.top + f.plot_h() / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
}

inline void axis_box(std::string& s, const Frame& f) {
    s += "<line x1=\"" + coord(f.left) + "\" y1=\"" + coord(f.top + f.plot_h()) + "\" x2=\"" +
         coord(f.left + f.plot_w()) + "\" y2=\"" + coord(f.top + f.plot_h()) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + coord(f.left) + "\" y1=\"" + coord(f.top) + "\" x2=\"" + coord(f.left) +
         "\" y2=\"" + coord(f.top + f.plot_h()) + "\" stroke=\"black\"/>\n";
}

struct Range {
    double lo = 0.0, hi = 1.0;
    void pad() {
        if (hi <= lo) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double margin = 0.05 * (hi - lo);
            lo -= margin;
            hi += margin;
        }
    }
    double frac(double v) const { return (v - lo) / (hi - lo); }
};

// Diverging blue-white-red map over [value_min, value_max].
inline std::string diverging_color(double v, double lo, double hi) {
    double t = (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
    t = std::clamp(t, 0.0, 1.0);
    const auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
    double r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = lerp(49, 247, u);
        g = lerp(84, 247, u);
        b = lerp(175, 247, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        r = lerp(247, 178, u);
        g = lerp(247, 24, u);
        b = lerp(247, 43, u);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)", static_cast<int>(r), static_cast<int>(g),
                  static_cast<int>(b));
    return buf;
}

inline void y_ticks(std::string& s, const Frame& f, const Range& ry) {
    for (int k = 0; k <= 4; ++k) {
        const double v = ry.lo + (ry.hi - ry.lo) * k / 4.0;
        const double y = f.top + f.plot_h() * (1.0 - ry.frac(v));
        s += "<line x1=\"" + coord(f.left - 4) + "\" y1=\"" + coord(y) + "\" x2=\"" +
             coord(f.left) + "\" y2=\"" + coord(y) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + coord(f.left - 8) + "\" y=\"" + coord(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             num_label(v) + "</text>\n";
    }
}

}  // namespace detail

inline std::string render_line_band(const LineBandChart& chart) {
    if (chart.x.empty() || chart.x.size() != chart.y.size())
        throw input_error("line chart: need matching nonempty x and y");
    const bool banded = !chart.band_low.empty();
    if (banded && (chart.band_low.size() != chart.x.size() ||
                   chart.band_high.size() != chart.x.size()))
        throw input_error("line chart: band sizes must match x");
    if (chart.log_x)
        for (double v : chart.x)
            if (!(v > 0.0)) throw input_error("line chart: log x needs positive x values");

    const detail::Frame f;
    const auto xpos = [&](double v) { return chart.log_x ? std::log10(v) : v; };

    detail::Range rx{xpos(chart.x.front()), xpos(chart.x.front())};
    detail::Range ry{chart.y.front(), chart.y.front()};
    for (std::size_t i = 0; i < chart.x.size(); ++i) {
        rx.lo = std::min(rx.lo, xpos(chart.x[i]));
        rx.hi = std::max(rx.hi, xpos(chart.x[i]));
        ry.lo = std::min(ry.lo, banded ? chart.band_low[i] : chart.y[i]);
        ry.hi = std::max(ry.hi, banded ? chart.band_high[i] : chart.y[i]);
    }
    rx.pad();
    ry.pad();

    const auto px = [&](double v) { return f.left + f.plot_w() * rx.frac(xpos(v)); };
    const auto py = [&](double v) { return f.top + f.plot_h() * (1.0 - ry.frac(v)); };

    std::string s;
    detail::open_svg(s, f.width, f.height);
    detail::title_and_axis_labels(s, f, chart.title, chart.x_label, chart.y_label);

    if (banded) {
        std::string pts;
        for (std::size_t i = 0; i < chart.x.size(); ++i)
            pts += detail::coord(px(chart.x[i])) + "," + detail::coord(py(chart.band_high[i])) +
                   " ";
        for (std::size_t i = chart.x.size(); i-- > 0;)
            pts += detail::coord(px(chart.x[i])) + "," + detail::coord(py(chart.band_low[i])) +
                   " ";
        s += "<polygon points=\"" + pts + "\" fill=\"rgb(158,202,225)\" fill-opacity=\"0.6\" "
             "stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < chart.x.size(); ++i)
        pts += detail::coord(px(chart.x[i])) + "," + detail::coord(py(chart.y[i])) + " ";
    s += "<polyline points=\"" + pts +
         "\" fill=\"none\" stroke=\"rgb(33,113,181)\" stroke-width=\"2\"/>\n";
    for (std::size_t i = 0; i < chart.x.size(); ++i)
        s += "<circle cx=\"" + detail::coord(px(chart.x[i])) + "\" cy=\"" +
             detail::coord(py(chart.y[i])) + "\" r=\"3\" fill=\"rgb(33,113,181)\"/>\n";

    detail::axis_box(s, f);
    detail::y_ticks(s, f, ry);
    for (std::size_t i = 0; i < chart.x.size(); ++i) {
        const double x = px(chart.x[i]);
        s += "<line x1=\"" + detail::coord(x) + "\" y1=\"" + detail::coord(f.top + f.plot_h()) +
             "\" x2=\"" + detail::coord(x) + "\" y2=\"" +
             detail::coord(f.top + f.plot_h() + 4) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + detail::coord(x) + "\" y=\"" +
             detail::coord(f.top + f.plot_h() + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail::num_label(chart.x[i]) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline std::string render_bar_interval(const BarIntervalChart& chart) {
    const std::size_t n = chart.labels.size();
    if (n == 0 || chart.value.size() != n || chart.lower.size() != n || chart.upper.size() != n)
        throw input_error("bar chart: need matching nonempty labels/value/lower/upper");

    const detail::Frame f;
    detail::Range ry{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        ry.lo = std::min({ry.lo, chart.lower[i], chart.value[i]});
        ry.hi = std::max({ry.hi, chart.upper[i], chart.value[i]});
    }
    ry.pad();
    const auto py = [&](double v) { return f.top + f.plot_h() * (1.0 - ry.frac(v)); };

    std::string s;
    detail::open_svg(s, f.width, f.height);
    detail::title_and_axis_labels(s, f, chart.title, "", chart.y_label);

    const double slot = f.plot_w() / static_cast<double>(n);
    const double bar_w = slot * 0.5;
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = f.left + slot * (static_cast<double>(i) + 0.5);
        const double y0 = py(std::max(0.0, ry.lo));
        const double yv = py(chart.value[i]);
        s += "<rect x=\"" + detail::coord(cx - bar_w / 2) + "\" y=\"" +
             detail::coord(std::min(yv, y0)) + "\" width=\"" + detail::coord(bar_w) +
             "\" height=\"" + detail::coord(std::abs(y0 - yv)) +
             "\" fill=\"rgb(158,202,225)\" stroke=\"rgb(33,113,181)\"/>\n";
        s += "<line x1=\"" + detail::coord(cx) + "\" y1=\"" + detail::coord(py(chart.lower[i])) +
             "\" x2=\"" + detail::coord(cx) + "\" y2=\"" + detail::coord(py(chart.upper[i])) +
             "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        for (double v : {chart.lower[i], chart.upper[i]})
            s += "<line x1=\"" + detail::coord(cx - 6) + "\" y1=\"" + detail::coord(py(v)) +
                 "\" x2=\"" + detail::coord(cx + 6) + "\" y2=\"" + detail::coord(py(v)) +
                 "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + detail::coord(cx) + "\" y=\"" +
             detail::coord(f.top + f.plot_h() + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail::xml_escape(chart.labels[i]) + "</text>\n";
    }
    detail::axis_box(s, f);
    detail::y_ticks(s, f, ry);
    s += "</svg>\n";
    return s;
}

inline std::string render_heatmap(const HeatmapChart& chart) {
    if (chart.cells.empty() || chart.col_labels.empty() || chart.row_labels.empty())
        throw input_error("heatmap: empty grid");
    for (const auto& cell : chart.cells)
        if (cell.row >= chart.row_labels.size() || cell.col >= chart.col_labels.size())
            throw input_error("heatmap: cell outside the labeled grid");

    const double cell_size = 56.0;
    const double left = 80.0, top = 70.0;
    const double width = left + cell_size * static_cast<double>(chart.col_labels.size()) + 30.0;
    const double height = top + cell_size * static_cast<double>(chart.row_labels.size()) + 50.0;

    std::string s;
    detail::open_svg(s, width, height);
    if (!chart.title.empty())
        s += "<text x=\"" + detail::coord(width / 2) +
             "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
             detail::xml_escape(chart.title) + "</text>\n";

    for (std::size_t c = 0; c < chart.col_labels.size(); ++c)
        s += "<text x=\"" + detail::coord(left + cell_size * (c + 0.5)) + "\" y=\"" +
             detail::coord(top - 10) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail::xml_escape(chart.col_labels[c]) + "</text>\n";
    for (std::size_t r = 0; r < chart.row_labels.size(); ++r)
        s += "<text x=\"" + detail::coord(left - 8) + "\" y=\"" +
             detail::coord(top + cell_size * (r + 0.5) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             detail::xml_escape(chart.row_labels[r]) + "</text>\n";
    if (!chart.x_label.empty())
        s += "<text x=\"" + detail::coord(left + cell_size * chart.col_labels.size() / 2) +
             "\" y=\"" + detail::coord(height - 14) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
             detail::xml_escape(chart.x_label) + "</text>\n";
    if (!chart.y_label.empty())
        s += "<text x=\"20\" y=\"" + detail::coord(top + cell_size * chart.row_labels.size() / 2) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
             "transform=\"rotate(-90 20 " +
             detail::coord(top + cell_size * chart.row_labels.size() / 2) + ")\">" +
             detail::xml_escape(chart.y_label) + "</text>\n";

    char value_buf[32];
    for (const auto& cell : chart.cells) {
        const double x = left + cell_size * static_cast<double>(cell.col);
        const double y = top + cell_size * static_cast<double>(cell.row);
        s += "<rect class=\"cell\" x=\"" + detail::coord(x) + "\" y=\"" + detail::coord(y) +
             "\" width=\"" + detail::coord(cell_size) + "\" height=\"" + detail::coord(cell_size) +
             "\" fill=\"" +
             detail::diverging_color(cell.value, chart.value_min, chart.value_max) +
             "\" stroke=\"white\">";
        if (!cell.annotation.empty())
            s += "<title>" + detail::xml_escape(cell.annotation) + "</title>";
        s += "</rect>\n";
        std::snprintf(value_buf, sizeof(value_buf), "%.2f", cell.value);
        s += "<text x=\"" + detail::coord(x + cell_size / 2) + "\" y=\"" +
             detail::coord(y + cell_size / 2 + 4) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             value_buf + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

using ChartData = std::variant<LineBandChart, BarIntervalChart, HeatmapChart>;

inline std::string render_svg_chart(const ChartData& data) {
    return std::visit(
        [](const auto& chart) {
            using T = std::decay_t<decltype(chart)>;
            if constexpr (std::is_same_v<T, LineBandChart>) return render_line_band(chart);
            else if constexpr (std::is_same_v<T, BarIntervalChart>)
                return render_bar_interval(chart);
            else
                return render_heatmap(chart);
        },
        data);
}

}  // namespace metaeval
