#include "llnlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "llnlab/numeric.hpp"

namespace llnlab {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

// Fixed 4-decimal pixel coordinates: stable bytes, sub-pixel accuracy.
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double transform(double v) const { return log ? std::log10(v) : v; }
    double t_lo() const { return transform(lo); }
    double t_hi() const { return transform(hi); }
    double unit(double v) const {
        double span = t_hi() - t_lo();
        if (span <= 0.0) return 0.5;
        return (transform(v) - t_lo()) / span;
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            int e0 = static_cast<int>(std::floor(std::log10(lo)));
            int e1 = static_cast<int>(std::ceil(std::log10(hi)));
            int step = std::max(1, (e1 - e0) / 6);
            for (int e = e0; e <= e1; e += step) {
                double v = std::pow(10.0, e);
                if (v >= lo * 0.999 && v <= hi * 1.001) out.push_back(v);
            }
            if (out.empty()) out = {lo, hi};
            return out;
        }
        double span = hi - lo;
        if (span <= 0.0) return {lo};
        double raw = span / 5.0;
        double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double norm = raw / mag;
        double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
        double first = std::ceil(lo / step) * step;
        for (double v = first; v <= hi + step * 1e-9; v += step) out.push_back(v);
        return out;
    }
};

std::string tick_label(double v, bool log) {
    if (log) {
        int e = static_cast<int>(std::llround(std::log10(v)));
        if (std::abs(v - std::pow(10.0, e)) / v < 1e-9) return "1e" + std::to_string(e);
    }
    double r = std::abs(v) < 1e-12 ? 0.0 : v; // avoid "-0"
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

} // namespace

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<SvgSeries>& series, bool log_x, bool log_y) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            double x = s.xs[i], y = s.ys[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (log_x && x <= 0.0) continue;
            if (log_y && y <= 0.0) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    bool empty = !(xmin <= xmax);
    if (empty) {
        xmin = log_x ? 1.0 : 0.0;
        xmax = log_x ? 10.0 : 1.0;
        ymin = log_y ? 1.0 : 0.0;
        ymax = log_y ? 10.0 : 1.0;
    }
    if (xmin == xmax) {
        xmin = log_x ? xmin / 2.0 : xmin - 0.5;
        xmax = log_x ? xmax * 2.0 : xmax + 0.5;
    }
    if (ymin == ymax) {
        ymin = log_y ? ymin / 2.0 : ymin - 0.5;
        ymax = log_y ? ymax * 2.0 : ymax + 0.5;
    }
    if (!log_y) {
        double pad = (ymax - ymin) * 0.05;
        ymin -= pad;
        ymax += pad;
    }
    Axis ax{xmin, xmax, log_x};
    Axis ay{ymin, ymax, log_y};

    auto X = [&](double v) { return kLeft + ax.unit(v) * (kWidth - kLeft - kRight); };
    auto Y = [&](double v) { return kHeight - kBottom - ay.unit(v) * (kHeight - kTop - kBottom); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
           xml_escape(title) + "</text>\n";

    // Frame and grid.
    svg += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" +
           px(kWidth - kLeft - kRight) + "\" height=\"" + px(kHeight - kTop - kBottom) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : ax.ticks()) {
        double x = X(t);
        svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(x) +
               "\" y2=\"" + px(kHeight - kBottom) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + px(x) + "\" y=\"" + px(kHeight - kBottom + 18) +
               "\" text-anchor=\"middle\">" + xml_escape(tick_label(t, log_x)) + "</text>\n";
    }
    for (double t : ay.ticks()) {
        double y = Y(t);
        svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(y) + "\" x2=\"" +
               px(kWidth - kRight) + "\" y2=\"" + px(y) + "\" stroke=\"#ddd\"/>\n";
        svg += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(y + 4) +
               "\" text-anchor=\"end\">" + xml_escape(tick_label(t, log_y)) + "</text>\n";
    }
    svg += "<text x=\"" + px((kLeft + kWidth - kRight) / 2) + "\" y=\"" + px(kHeight - 12) +
           "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + px((kTop + kHeight - kBottom) / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           px((kTop + kHeight - kBottom) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

    std::size_t color = 0;
    double legend_y = kTop + 14;
    for (const auto& s : series) {
        const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string points;
        for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
            double x = s.xs[i], y = s.ys[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (log_x && x <= 0.0) continue;
            if (log_y && y <= 0.0) continue;
            if (!points.empty()) points.push_back(' ');
            points += px(X(x)) + "," + px(Y(y));
        }
        if (!points.empty())
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
                   "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        if (!s.label.empty()) {
            svg += "<line x1=\"" + px(kWidth - 170) + "\" y1=\"" + px(legend_y - 4) +
                   "\" x2=\"" + px(kWidth - 150) + "\" y2=\"" + px(legend_y - 4) +
                   "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"2\"/>\n";
            svg += "<text x=\"" + px(kWidth - 144) + "\" y=\"" + px(legend_y) + "\">" +
                   xml_escape(s.label) + "</text>\n";
            legend_y += 16;
        }
        ++color;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace llnlab
