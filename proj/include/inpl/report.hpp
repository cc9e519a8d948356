#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/run_io.hpp"

namespace inpl {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

namespace svgdetail {

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors[i % 8];
}

}  // namespace svgdetail

/// Deterministic SVG line chart: same series in, same bytes out.
inline std::string render_line_chart(const std::vector<Series>& series, const std::string& title,
                                     const std::string& x_label, const std::string& y_label) {
    const double width = 720, height = 440, ml = 70, mr = 160, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (!any) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                any = true;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << (width - mr + ml) / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = xmin + (xmax - xmin) * t / 4.0;
        double fy = ymin + (ymax - ymin) * t / 4.0;
        os << "<text x=\"" << svgdetail::num(px(fx)) << "\" y=\"" << height - mb + 18
           << "\" text-anchor=\"middle\">" << svgdetail::num(fx) << "</text>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << svgdetail::num(py(fy) + 4)
           << "\" text-anchor=\"end\">" << svgdetail::num(fy) << "</text>\n";
    }
    os << "<text x=\"" << (width - mr + ml) / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << (height - mb + mt) / 2
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (height - mb + mt) / 2 << ")\">"
       << y_label << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        os << "<polyline fill=\"none\" stroke=\"" << svgdetail::palette(si)
           << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (!first) os << ' ';
            os << svgdetail::num(px(s.x[i])) << ',' << svgdetail::num(py(s.y[i]));
            first = false;
        }
        os << "\"/>\n";
        double ly = mt + 16.0 * static_cast<double>(si);
        os << "<line x1=\"" << width - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - mr + 30
           << "\" y2=\"" << ly << "\" stroke=\"" << svgdetail::palette(si)
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << width - mr + 35 << "\" y=\"" << ly + 4 << "\">" << s.name
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// One named, already-parsed run.
struct RunTable {
    std::string name;
    MetricsTable table;
};

inline std::vector<double> column_values(const MetricsTable& t, const std::string& name) {
    std::size_t c = t.column(name);
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (const auto& row : t.rows)
        v.push_back(row[c] ? *row[c] : std::numeric_limits<double>::quiet_NaN());
    return v;
}

/// Renders the standard figure set into out_dir: group precision/recall
/// curves, accuracy curves, and OOD acceptance curves. Pure function of the
/// parsed CSVs.
inline void write_report_figures(const std::vector<RunTable>& runs, const std::string& out_dir) {
    if (runs.empty()) throw std::runtime_error("report: no runs");
    auto figure = [&](const std::string& file, const std::vector<std::string>& cols,
                      const std::string& title, const std::string& ylab) {
        std::vector<Series> series;
        for (const auto& run : runs) {
            auto x = column_values(run.table, "iteration");
            for (const auto& col : cols) {
                Series s;
                s.name = runs.size() > 1 ? run.name + ":" + col : col;
                s.x = x;
                s.y = column_values(run.table, col);
                series.push_back(std::move(s));
            }
        }
        std::ofstream os(out_dir + "/" + file, std::ios::trunc);
        if (!os) throw std::runtime_error("report: cannot write " + out_dir + "/" + file);
        os << render_line_chart(series, title, "iteration", ylab);
    };
    figure("precision.svg", {"head_precision", "body_precision", "tail_precision"},
           "Pseudo-label precision by group", "precision");
    figure("recall.svg", {"head_recall", "body_recall", "tail_recall"},
           "Pseudo-label recall by group", "recall");
    figure("accuracy.svg", {"test_accuracy", "minority_accuracy"}, "Test accuracy", "accuracy");
    figure("ood.svg", {"ood_accepted_cum"}, "Cumulative OOD pseudo-labels accepted", "count");
    figure("micro_precision.svg", {"micro_precision", "accept_rate"},
           "Micro precision and acceptance rate", "value");
}

}  // namespace inpl
