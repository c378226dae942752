#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jndq/errors.hpp"
#include "jndq/serialize.hpp"

namespace jndq {

// One error-bar series: point estimates with optional 95% halfwidths (NaN
// when unavailable).
struct ReportSeries {
    std::string label;
    std::vector<std::string> ids;
    std::vector<double> estimate;
    std::vector<double> ci;
};

struct ReportFamily {
    std::string name;   // file suffix: jnd, bias, inconsistency, difficulty
    std::string title;
    std::vector<ReportSeries> series;  // one, or two for an overlay
};

namespace detail {

inline double json_ci(const Json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : v.get<double>();
}

inline ReportSeries series_from_rows(const Json& rows, const char* id_key,
                                     const std::string& label) {
    ReportSeries s;
    s.label = label;
    for (const auto& row : rows) {
        s.ids.push_back(row.at(id_key).get<std::string>());
        s.estimate.push_back(row.at("estimate").get<double>());
        s.ci.push_back(json_ci(row.at("ci")));
    }
    return s;
}

}  // namespace detail

// Extracts plottable families from a result document.  A fit document
// carries all four; an MOS document carries content JND locations only.
inline std::vector<ReportFamily> report_families(const Json& doc,
                                                 const std::string& label) {
    std::vector<ReportFamily> families;
    if (doc.is_object() && doc.contains("y")) {
        families.push_back({"jnd", "Content JND location (QP)",
                            {detail::series_from_rows(doc["y"], "content", label)}});
        families.push_back({"bias", "Subject bias (QP)",
                            {detail::series_from_rows(doc["b"], "subject", label)}});
        families.push_back({"inconsistency", "Subject inconsistency (QP)",
                            {detail::series_from_rows(doc["v_s"], "subject", label)}});
        families.push_back({"difficulty", "Content difficulty (QP)",
                            {detail::series_from_rows(doc["v_c"], "content", label)}});
        return families;
    }
    if (doc.is_array()) {
        ReportSeries s;
        s.label = label;
        for (const auto& row : doc) {
            s.ids.push_back(row.at("content").get<std::string>());
            s.estimate.push_back(row.at("mean").get<double>());
            s.ci.push_back(row.at("ci").get<double>());
        }
        families.push_back({"jnd", "Content JND location (QP)", {s}});
        return families;
    }
    throw DataError("unrecognized result document for report");
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline const char* series_color(std::size_t i) {
    return i == 0 ? "#1f77b4" : "#d62728";
}

inline std::string render_svg(const ReportFamily& family) {
    const double width = 900, height = 420;
    const double left = 64, right = 20, top = 44, bottom = 84;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const std::size_t n = family.series[0].ids.size();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : family.series)
        for (std::size_t i = 0; i < s.estimate.size(); ++i) {
            const double c = std::isnan(s.ci[i]) ? 0.0 : s.ci[i];
            lo = std::min(lo, s.estimate[i] - c);
            hi = std::max(hi, s.estimate[i] + c);
        }
    if (!(hi > lo)) { lo -= 1.0; hi += 1.0; }
    const double pad = 0.05 * (hi - lo);
    lo -= pad; hi += pad;

    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step =
        mag * (norm <= 1.0 ? 1.0 : norm <= 2.0 ? 2.0 : norm <= 2.5 ? 2.5
               : norm <= 5.0 ? 5.0 : 10.0);

    auto ypix = [&](double v) {
        return top + (hi - v) * plot_h / (hi - lo);
    };
    auto xpix = [&](std::size_t i, std::size_t series_idx) {
        return left + (static_cast<double>(i) + 0.5) * plot_w /
                          static_cast<double>(n) +
               (series_idx == 0 ? 0.0 : 4.0);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           fmt(width, "%.0f") + "\" height=\"" + fmt(height, "%.0f") +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(left) + "\" y=\"24\" font-size=\"15\">" +
           family.title + "</text>\n";

    for (double tick = std::ceil(lo / step) * step; tick <= hi + 1e-9 * step;
         tick += step) {
        const double y = ypix(tick);
        svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
               fmt(width - right) + "\" y2=\"" + fmt(y) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(y + 4) +
               "\" text-anchor=\"end\">" + fmt(tick, "%g") + "</text>\n";
    }
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" +
           fmt(left) + "\" y2=\"" + fmt(height - bottom) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(height - bottom) +
           "\" x2=\"" + fmt(width - right) + "\" y2=\"" +
           fmt(height - bottom) + "\" stroke=\"black\"/>\n";

    const std::size_t stride = n > 24 ? (n + 23) / 24 : 1;
    for (std::size_t i = 0; i < n; i += stride) {
        const double x = left + (static_cast<double>(i) + 0.5) * plot_w /
                                    static_cast<double>(n);
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(height - bottom + 14) +
               "\" text-anchor=\"start\" transform=\"rotate(45 " + fmt(x) +
               " " + fmt(height - bottom + 14) + ")\">" +
               family.series[0].ids[i] + "</text>\n";
    }

    for (std::size_t k = 0; k < family.series.size(); ++k) {
        const auto& s = family.series[k];
        const char* color = series_color(k);
        for (std::size_t i = 0; i < s.ids.size(); ++i) {
            const double x = xpix(i, k);
            if (!std::isnan(s.ci[i]) && s.ci[i] > 0.0) {
                const double y1 = ypix(s.estimate[i] - s.ci[i]);
                const double y2 = ypix(s.estimate[i] + s.ci[i]);
                svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y1) +
                       "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(y2) +
                       "\" stroke=\"" + color + "\"/>\n";
                for (double ye : {y1, y2})
                    svg += "<line x1=\"" + fmt(x - 3) + "\" y1=\"" + fmt(ye) +
                           "\" x2=\"" + fmt(x + 3) + "\" y2=\"" + fmt(ye) +
                           "\" stroke=\"" + color + "\"/>\n";
            }
            svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" +
                   fmt(ypix(s.estimate[i])) + "\" r=\"2.5\" fill=\"" + color +
                   "\"/>\n";
        }
        const double lx = width - right - 180;
        const double ly = top + 14.0 * static_cast<double>(k);
        svg += "<rect x=\"" + fmt(lx) + "\" y=\"" + fmt(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + fmt(lx + 14) + "\" y=\"" + fmt(ly) + "\">" +
               s.label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace detail

// Writes one SVG per family of the primary document plus a flat CSV of all
// estimates.  When a compare document is given, families present in both are
// overlaid; their id lists must agree.
inline std::vector<std::string> write_report(
    const Json& primary, const std::string& primary_label, const Json* compare,
    const std::string& compare_label, const std::string& out_prefix) {
    std::vector<ReportFamily> families =
        report_families(primary, primary_label);
    if (compare) {
        std::vector<ReportFamily> other =
            report_families(*compare, compare_label);
        for (auto& fam : families)
            for (const auto& extra : other)
                if (extra.name == fam.name) {
                    if (extra.series[0].ids != fam.series[0].ids)
                        throw DataError("mismatched " + fam.name +
                                        " id sets between report inputs");
                    fam.series.push_back(extra.series[0]);
                }
    }

    std::vector<std::string> written;
    for (const auto& fam : families) {
        const std::string path = out_prefix + "_" + fam.name + ".svg";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path);
        out << detail::render_svg(fam);
        written.push_back(path);
    }

    const std::string csv_path = out_prefix + "_estimates.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot write " + csv_path);
    csv << "family,id,estimate,ci,source\n";
    for (const auto& fam : families)
        for (const auto& s : fam.series)
            for (std::size_t i = 0; i < s.ids.size(); ++i) {
                csv << fam.name << ',' << s.ids[i] << ','
                    << detail::fmt(s.estimate[i], "%.6f") << ',';
                if (!std::isnan(s.ci[i])) csv << detail::fmt(s.ci[i], "%.6f");
                csv << ',' << s.label << '\n';
            }
    written.push_back(csv_path);
    return written;
}

}  // namespace jndq
