#include "clfree/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace clfree {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Frame {
    double x0, x1, y0, y1; // data range
    int w, h;
    static constexpr int margin = 56;

    double px(double x) const {
        return margin + (x - x0) / (x1 - x0) * (w - 2 * margin);
    }
    double py(double y) const {
        return h - margin - (y - y0) / (y1 - y0) * (h - 2 * margin);
    }
};

void axes(std::ostringstream& out, const Frame& fr, const SvgStyle& st) {
    out << "<rect width=\"" << fr.w << "\" height=\"" << fr.h
        << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << Frame::margin << "\" y1=\"" << fr.h - Frame::margin
        << "\" x2=\"" << fr.w - Frame::margin << "\" y2=\"" << fr.h - Frame::margin
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << Frame::margin << "\" y1=\"" << Frame::margin
        << "\" x2=\"" << Frame::margin << "\" y2=\"" << fr.h - Frame::margin
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = fr.x0 + (fr.x1 - fr.x0) * i / 5.0;
        const double fy = fr.y0 + (fr.y1 - fr.y0) * i / 5.0;
        out << "<line x1=\"" << fmt(fr.px(fx)) << "\" y1=\"" << fr.h - Frame::margin
            << "\" x2=\"" << fmt(fr.px(fx)) << "\" y2=\"" << fr.h - Frame::margin + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(fr.px(fx)) << "\" y=\"" << fr.h - Frame::margin + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(fx) << "</text>\n";
        out << "<line x1=\"" << Frame::margin - 5 << "\" y1=\"" << fmt(fr.py(fy))
            << "\" x2=\"" << Frame::margin << "\" y2=\"" << fmt(fr.py(fy))
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << Frame::margin - 8 << "\" y=\"" << fmt(fr.py(fy) + 4)
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(fy) << "</text>\n";
    }
    if (!st.title.empty())
        out << "<text x=\"" << fr.w / 2 << "\" y=\"24\" font-size=\"14\" "
            << "text-anchor=\"middle\">" << st.title << "</text>\n";
    out << "<text x=\"" << fr.w / 2 << "\" y=\"" << fr.h - 14
        << "\" font-size=\"12\" text-anchor=\"middle\">" << st.x_label << "</text>\n";
    if (!st.y_label.empty())
        out << "<text x=\"16\" y=\"" << fr.h / 2
            << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << fr.h / 2 << ")\">" << st.y_label << "</text>\n";
}

} // namespace

std::string emit_svg(const TrajectoryReport& report, const SvgStyle& style) {
    if (report.series.empty()) throw std::invalid_argument("emit_svg: empty report");
    Frame fr{0, 0, 0, 0, style.width, style.height};
    fr.x0 = report.series.front().t;
    fr.x1 = report.series.back().t;
    if (fr.x1 <= fr.x0) fr.x1 = fr.x0 + 1;
    double lo = 0, hi = 0;
    bool first = true;
    bool any_band = false;
    for (const TrajectoryRow& r : report.series) {
        const double b = r.band_halfwidth;
        if (b > 0) any_band = true;
        const double vals[4] = {r.measured, r.predicted, r.predicted - b,
                                r.predicted + b};
        for (const double v : vals) {
            if (first || v < lo) lo = v;
            if (first || v > hi) hi = v;
            first = false;
        }
    }
    if (hi <= lo) hi = lo + 1;
    fr.y0 = lo;
    fr.y1 = hi;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.w
        << "\" height=\"" << fr.h << "\">\n";
    axes(out, fr, style);

    if (any_band) {
        out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" "
               "points=\"";
        for (const TrajectoryRow& r : report.series)
            out << fmt(fr.px(r.t)) << ',' << fmt(fr.py(r.predicted + r.band_halfwidth))
                << ' ';
        for (auto it = report.series.rbegin(); it != report.series.rend(); ++it)
            out << fmt(fr.px(it->t)) << ','
                << fmt(fr.py(it->predicted - it->band_halfwidth)) << ' ';
        out << "\"/>\n";
    }

    out << "<polyline fill=\"none\" stroke=\"#3182bd\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 3\" points=\"";
    for (const TrajectoryRow& r : report.series)
        out << fmt(fr.px(r.t)) << ',' << fmt(fr.py(r.predicted)) << ' ';
    out << "\"/>\n";

    if (report.series.size() > 1) {
        out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
               "points=\"";
        for (const TrajectoryRow& r : report.series)
            out << fmt(fr.px(r.t)) << ',' << fmt(fr.py(r.measured)) << ' ';
        out << "\"/>\n";
    }
    for (const TrajectoryRow& r : report.series)
        out << "<circle cx=\"" << fmt(fr.px(r.t)) << "\" cy=\"" << fmt(fr.py(r.measured))
            << "\" r=\"2\" fill=\"#d62728\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string emit_svg_scatter(const std::vector<double>& x,
                             const std::vector<double>& y, double slope,
                             double intercept, bool with_fit,
                             const SvgStyle& style) {
    if (x.empty() || x.size() != y.size())
        throw std::invalid_argument("emit_svg_scatter: empty or mismatched data");
    Frame fr{*std::min_element(x.begin(), x.end()),
             *std::max_element(x.begin(), x.end()),
             *std::min_element(y.begin(), y.end()),
             *std::max_element(y.begin(), y.end()), style.width, style.height};
    if (fr.x1 <= fr.x0) fr.x1 = fr.x0 + 1;
    if (fr.y1 <= fr.y0) fr.y1 = fr.y0 + 1;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.w
        << "\" height=\"" << fr.h << "\">\n";
    axes(out, fr, style);
    if (with_fit) {
        out << "<line x1=\"" << fmt(fr.px(fr.x0)) << "\" y1=\""
            << fmt(fr.py(slope * fr.x0 + intercept)) << "\" x2=\"" << fmt(fr.px(fr.x1))
            << "\" y2=\"" << fmt(fr.py(slope * fr.x1 + intercept))
            << "\" stroke=\"#3182bd\" stroke-width=\"1.5\"/>\n";
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        out << "<circle cx=\"" << fmt(fr.px(x[i])) << "\" cy=\"" << fmt(fr.py(y[i]))
            << "\" r=\"3\" fill=\"#d62728\"/>\n";
    out << "</svg>\n";
    return out.str();
}

} // namespace clfree
