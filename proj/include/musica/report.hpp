#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <tuple>
#include <vector>

#include "musica/error.hpp"

namespace musica {

/// One CSV line of a report: summary statistics of one image's CNR map under
/// one processing method, plus the noise floor the map was divided by and the
/// mean-CNR change relative to the unprocessed image.
struct ReportRow {
    std::string image;
    std::string method;
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
    double noise_level = 0.0;
    double improvement_pct = 0.0;
    double elapsed_ms = 0.0;
};

inline std::string csv_header() {
    return "image,method,mean,std,median,q1,q3,min,max,noise_level,improvement_pct,elapsed_ms";
}

namespace detail {

/// Six significant digits, matching what the column consumers diff against.
inline std::string format_stat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Minimal CSV quoting: only fields containing a comma, quote, or newline are
/// wrapped, with embedded quotes doubled.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string xml_escape(const std::string& s) {
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

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

inline std::string format_csv_row(const ReportRow& r) {
    std::string out = detail::csv_field(r.image) + ',' + detail::csv_field(r.method);
    for (double v : {r.mean, r.stddev, r.median, r.q1, r.q3, r.min, r.max,
                     r.noise_level, r.improvement_pct, r.elapsed_ms}) {
        out += ',';
        out += detail::format_stat(v);
    }
    return out;
}

/// Full CSV document: header plus one line per row, sorted by image name then
/// method so repeated runs over the same inputs are byte-identical.
inline std::string render_csv(std::vector<ReportRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.image, a.method) < std::tie(b.image, b.method);
    });
    std::string out = csv_header() + "\n";
    for (const ReportRow& r : rows) {
        out += format_csv_row(r);
        out += '\n';
    }
    return out;
}

/// Box-and-whisker chart of the report: one box per (image, method) pair,
/// grouped by image, the box spanning q1..q3 with a median line and whiskers
/// at min and max.  Output is plain SVG with nothing run-dependent in it, so
/// identical rows render to identical bytes.
inline std::string render_boxplot_svg(const std::vector<ReportRow>& rows,
                                      const std::string& title = "CNR by image and method") {
    struct MethodStyle {
        const char* name;
        const char* color;
    };
    constexpr std::array<MethodStyle, 3> kMethods{{
        {"original", "#8d99ae"},
        {"conventional", "#3f72af"},
        {"multistage", "#c1444d"},
    }};

    std::vector<ReportRow> plot;
    for (const ReportRow& r : rows)
        for (const MethodStyle& m : kMethods)
            if (r.method == m.name) plot.push_back(r);
    std::sort(plot.begin(), plot.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.image, a.method) < std::tie(b.image, b.method);
    });

    std::vector<std::string> images;
    for (const ReportRow& r : plot)
        if (images.empty() || images.back() != r.image) images.push_back(r.image);

    double lo = 0.0, hi = 1.0;
    if (!plot.empty()) {
        lo = plot.front().min;
        hi = plot.front().max;
        for (const ReportRow& r : plot) {
            lo = std::min(lo, r.min);
            hi = std::max(hi, r.max);
        }
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double box_w = 14.0, box_gap = 5.0, group_pad = 16.0;
    const double group_w = kMethods.size() * box_w + (kMethods.size() - 1) * box_gap + group_pad;
    const double margin_l = 58.0, margin_r = 16.0, margin_t = 44.0, margin_b = 86.0;
    const double plot_h = 260.0;
    const double plot_w = std::max<double>(images.size(), 1) * group_w;
    const double width = margin_l + plot_w + margin_r;
    const double height = margin_t + plot_h + margin_b;

    const auto y_of = [&](double v) {
        return margin_t + plot_h * (1.0 - (v - lo) / (hi - lo));
    };

    std::string s;
    const auto line = [&](double x1, double y1, double x2, double y2,
                          const std::string& stroke, double sw) {
        s += "  <line x1=\"" + detail::svg_num(x1) + "\" y1=\"" + detail::svg_num(y1)
           + "\" x2=\"" + detail::svg_num(x2) + "\" y2=\"" + detail::svg_num(y2)
           + "\" stroke=\"" + stroke + "\" stroke-width=\"" + detail::svg_num(sw) + "\"/>\n";
    };
    const auto rect = [&](double x, double y, double w, double h,
                          const std::string& fill, const std::string& stroke) {
        s += "  <rect x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(y)
           + "\" width=\"" + detail::svg_num(w) + "\" height=\"" + detail::svg_num(h)
           + "\" fill=\"" + fill + "\" fill-opacity=\"0.6\" stroke=\"" + stroke + "\"/>\n";
    };
    const auto text = [&](double x, double y, const std::string& t, int size,
                          const std::string& anchor, const std::string& extra = "") {
        s += "  <text x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(y)
           + "\" font-size=\"" + std::to_string(size)
           + "\" font-family=\"sans-serif\" fill=\"#333\" text-anchor=\"" + anchor + "\""
           + extra + ">" + detail::xml_escape(t) + "</text>\n";
    };

    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width)
       + "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 "
       + detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"" + detail::svg_num(width) + "\" height=\""
       + detail::svg_num(height) + "\" fill=\"white\"/>\n";
    text(margin_l, 20.0, title, 15, "start");

    // Legend, top right.
    {
        double lx = width - margin_r;
        for (std::size_t i = kMethods.size(); i-- > 0;) {
            const MethodStyle& m = kMethods[i];
            const double label_w = 7.0 * static_cast<double>(std::string(m.name).size());
            lx -= label_w;
            text(lx, 20.0, m.name, 11, "start");
            lx -= 16.0;
            rect(lx, 12.0, 10.0, 10.0, m.color, m.color);
            lx -= 14.0;
        }
    }

    // Axes and horizontal grid with value labels.
    line(margin_l, margin_t, margin_l, margin_t + plot_h, "#444", 1.0);
    line(margin_l, margin_t + plot_h, margin_l + plot_w, margin_t + plot_h, "#444", 1.0);
    {
        const double raw_step = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
        double step = mag;
        for (double mult : {1.0, 2.0, 5.0, 10.0})
            if (mag * mult >= raw_step) { step = mag * mult; break; }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
            const double y = y_of(v);
            line(margin_l, y, margin_l + plot_w, y, "#ddd", 0.5);
            text(margin_l - 6.0, y + 3.5, detail::format_stat(v), 10, "end");
        }
    }
    text(14.0, margin_t + plot_h / 2.0, "CNR", 12, "middle",
         " transform=\"rotate(-90 14.00 " + detail::svg_num(margin_t + plot_h / 2.0) + ")\"");

    for (std::size_t gi = 0; gi < images.size(); ++gi) {
        const double gx = margin_l + static_cast<double>(gi) * group_w + group_pad / 2.0;
        for (std::size_t mi = 0; mi < kMethods.size(); ++mi) {
            const MethodStyle& m = kMethods[mi];
            const ReportRow* row = nullptr;
            for (const ReportRow& r : plot)
                if (r.image == images[gi] && r.method == m.name) row = &r;
            if (!row) continue;  // the slot stays empty, keeping columns aligned

            const double cx = gx + static_cast<double>(mi) * (box_w + box_gap) + box_w / 2.0;
            const double x0 = cx - box_w / 2.0;
            line(cx, y_of(row->min), cx, y_of(row->q1), m.color, 1.0);
            line(cx, y_of(row->q3), cx, y_of(row->max), m.color, 1.0);
            line(cx - box_w / 4.0, y_of(row->min), cx + box_w / 4.0, y_of(row->min), m.color, 1.0);
            line(cx - box_w / 4.0, y_of(row->max), cx + box_w / 4.0, y_of(row->max), m.color, 1.0);
            rect(x0, y_of(row->q3), box_w, y_of(row->q1) - y_of(row->q3), m.color, m.color);
            line(x0, y_of(row->median), x0 + box_w, y_of(row->median), "#1a1a1a", 1.5);
        }
        const double label_x = gx + (group_w - group_pad) / 2.0;
        const double label_y = margin_t + plot_h + 16.0;
        text(label_x, label_y, images[gi], 10, "end",
             " transform=\"rotate(-35 " + detail::svg_num(label_x) + " "
             + detail::svg_num(label_y) + ")\"");
    }

    s += "</svg>\n";
    return s;
}

} // namespace musica
