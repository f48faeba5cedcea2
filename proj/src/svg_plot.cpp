#include "gdnm/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gdnm {

bool is_dyadic_grid(const EstimateSeries& series) {
    if (series.rows.size() < 2) return false;
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        if (!(series.rows[i].grid > 0.0)) return false;
        if (i > 0 && std::abs(series.rows[i].grid / series.rows[i - 1].grid - 2.0) > 1e-9) return false;
    }
    return true;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;
    double pixel_lo = 0.0;
    double pixel_hi = 1.0;

    double map(double v) const {
        const double a = log ? std::log2(lo) : lo;
        const double b = log ? std::log2(hi) : hi;
        const double x = log ? std::log2(v) : v;
        const double frac = b > a ? (x - a) / (b - a) : 0.5;
        return pixel_lo + frac * (pixel_hi - pixel_lo);
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

std::string px(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

} // namespace

std::string plot(const EstimateSeries& series, PlotStyle style) {
    const auto& rows = series.rows;
    std::vector<double> ref_x;
    std::vector<double> ref_y;
    if (series.reference.size() == rows.size()) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(series.reference[i])) continue;
            ref_x.push_back(rows[i].grid);
            ref_y.push_back(series.reference[i]);
        }
    }

    Axis x;
    x.log = is_dyadic_grid(series);
    x.pixel_lo = kLeft;
    x.pixel_hi = kWidth - kRight;
    Axis y;
    y.pixel_lo = kHeight - kBottom;
    y.pixel_hi = kTop;

    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -xlo;
    double ylo = xlo;
    double yhi = -xlo;
    for (const auto& r : rows) {
        xlo = std::min(xlo, r.grid);
        xhi = std::max(xhi, r.grid);
        for (double v : {r.ci_low, r.ci_high, r.estimate}) {
            if (!std::isfinite(v)) continue;
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    }
    for (double v : ref_y) {
        ylo = std::min(ylo, v);
        yhi = std::max(yhi, v);
    }

    double anchor = std::numeric_limits<double>::quiet_NaN();
    if (style == PlotStyle::Tail) {
        for (const auto& r : rows)
            if (r.grid > 0.0) {
                anchor = r.estimate * std::sqrt(r.grid);
                break;
            }
    }
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (style == PlotStyle::Eta) {
        if (auto it = series.derived.find("bound"); it != series.derived.end()) bound = it->second;
        if (std::isfinite(bound)) {
            ylo = std::min(ylo, bound);
            yhi = std::max(yhi, bound);
        }
    }

    if (!std::isfinite(xlo)) {
        xlo = 0.0;
        xhi = 1.0;
    }
    if (!std::isfinite(ylo)) {
        ylo = 0.0;
        yhi = 1.0;
    }
    if (xhi == xlo) {
        const double pad = xlo == 0.0 ? 1.0 : std::abs(xlo) * 0.5;
        xlo -= pad;
        xhi += pad;
        x.log = false;
    }
    if (yhi == ylo) {
        const double pad = ylo == 0.0 ? 1.0 : std::abs(ylo) * 0.5;
        ylo -= pad;
        yhi += pad;
    }
    const double ypad = 0.05 * (yhi - ylo);
    x.lo = xlo;
    x.hi = xhi;
    y.lo = ylo - ypad;
    y.hi = yhi + ypad;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << series.name << "</text>\n";

    // Axes.
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y.pixel_lo << "\" x2=\"" << x.pixel_hi << "\" y2=\"" << y.pixel_lo
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y.pixel_lo << "\" x2=\"" << kLeft << "\" y2=\"" << y.pixel_hi
        << "\" stroke=\"black\"/>\n";
    for (const auto& r : rows) {
        const double cx = x.map(r.grid);
        out << "<line x1=\"" << px(cx) << "\" y1=\"" << y.pixel_lo << "\" x2=\"" << px(cx) << "\" y2=\""
            << y.pixel_lo + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(cx) << "\" y=\"" << y.pixel_lo + 18 << "\" text-anchor=\"middle\">" << fmt(r.grid)
            << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y.lo + (y.hi - y.lo) * i / 4.0;
        const double cy = y.map(v);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << px(cy) << "\" x2=\"" << kLeft << "\" y2=\"" << px(cy)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << px(cy + 4) << "\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + x.pixel_hi) / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
        << series.grid_label << (x.log ? " (log scale)" : "") << "</text>\n";

    if (ref_x.size() >= 2) {
        out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"6 3\" points=\"";
        for (std::size_t i = 0; i < ref_x.size(); ++i) out << px(x.map(ref_x[i])) << ',' << px(y.map(ref_y[i])) << ' ';
        out << "\"/>\n";
    } else if (ref_x.size() == 1) {
        out << "<circle cx=\"" << px(x.map(ref_x[0])) << "\" cy=\"" << px(y.map(ref_y[0]))
            << "\" r=\"3\" fill=\"none\" stroke=\"#d62728\"/>\n";
    }

    if (std::isfinite(anchor)) {
        constexpr int kSamples = 64;
        const double start = std::max(xlo, std::numeric_limits<double>::min());
        std::vector<double> xs;
        for (const auto& r : rows)
            if (r.grid > 0.0) xs.push_back(r.grid);
        if (!xs.empty()) {
            const double first = std::max(start, xs.front());
            out << "<polyline class=\"tail-reference\" fill=\"none\" stroke=\"#2ca02c\" points=\"";
            for (int i = 0; i <= kSamples; ++i) {
                const double v = x.log ? first * std::pow(xhi / first, double(i) / kSamples)
                                       : first + (xhi - first) * i / kSamples;
                const double yv = std::clamp(anchor / std::sqrt(v), y.lo, y.hi);
                out << px(x.map(v)) << ',' << px(y.map(yv)) << ' ';
            }
            out << "\"/>\n";
        }
    }

    if (std::isfinite(bound)) {
        out << "<line class=\"eta-bound\" x1=\"" << kLeft << "\" y1=\"" << px(y.map(bound)) << "\" x2=\"" << x.pixel_hi
            << "\" y2=\"" << px(y.map(bound)) << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4 2\"/>\n";
    }

    for (const auto& r : rows) {
        const double cx = x.map(r.grid);
        const double lo = std::isfinite(r.ci_low) ? r.ci_low : r.estimate;
        const double hi = std::isfinite(r.ci_high) ? r.ci_high : r.estimate;
        out << "<line class=\"whisker\" x1=\"" << px(cx) << "\" y1=\"" << px(y.map(lo)) << "\" x2=\"" << px(cx)
            << "\" y2=\"" << px(y.map(hi)) << "\" stroke=\"#1f77b4\"/>\n";
        for (double v : {lo, hi})
            out << "<line x1=\"" << px(cx - 4) << "\" y1=\"" << px(y.map(v)) << "\" x2=\"" << px(cx + 4) << "\" y2=\""
                << px(y.map(v)) << "\" stroke=\"#1f77b4\"/>\n";
        if (std::isfinite(r.estimate))
            out << "<circle class=\"marker\" cx=\"" << px(cx) << "\" cy=\"" << px(y.map(r.estimate))
                << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace gdnm
