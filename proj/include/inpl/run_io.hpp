#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/trainer.hpp"

namespace inpl {

// metrics.csv schema, version 1. First line is a schema marker, second the
// header. Per-class columns repeat for c = 0..K-1. Absent values (undefined
// precision, no losses yet) are empty cells.
inline constexpr const char* kMetricsSchema = "# inpl-metrics v1";

inline std::string metrics_header(int num_classes) {
    std::ostringstream os;
    os << "iteration,loss_s,loss_u,accept_rate,micro_precision,"
          "head_precision,body_precision,tail_precision,"
          "head_recall,body_recall,tail_recall,"
          "ood_accepted_eval,ood_accepted_cum,test_accuracy,minority_accuracy";
    for (int c = 0; c < num_classes; ++c) os << ",precision_" << c;
    for (int c = 0; c < num_classes; ++c) os << ",recall_" << c;
    for (int c = 0; c < num_classes; ++c) os << ",accuracy_" << c;
    return os.str();
}

namespace iodetail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace iodetail

inline void write_metrics_csv(const RunMetrics& metrics, int num_classes, std::ostream& os) {
    os << kMetricsSchema << '\n' << metrics_header(num_classes) << '\n';
    for (const auto& r : metrics.records) {
        os << r.iteration << ',';
        os << (r.has_losses ? iodetail::fmt(r.loss_s) : std::string()) << ',';
        os << (r.has_losses ? iodetail::fmt(r.loss_u) : std::string()) << ',';
        os << iodetail::fmt(r.accept_rate) << ',';
        os << iodetail::fmt_opt(r.pr.micro_precision) << ',';
        os << iodetail::fmt_opt(r.group_pr.head_precision) << ',';
        os << iodetail::fmt_opt(r.group_pr.body_precision) << ',';
        os << iodetail::fmt_opt(r.group_pr.tail_precision) << ',';
        os << iodetail::fmt(r.group_pr.head_recall) << ',';
        os << iodetail::fmt(r.group_pr.body_recall) << ',';
        os << iodetail::fmt(r.group_pr.tail_recall) << ',';
        os << r.ood_accepted_eval << ',' << r.ood_accepted_cumulative << ',';
        os << iodetail::fmt(r.test_accuracy) << ',' << iodetail::fmt(r.minority_accuracy);
        for (int c = 0; c < num_classes; ++c)
            os << ',' << iodetail::fmt_opt(r.pr.precision[static_cast<std::size_t>(c)]);
        for (int c = 0; c < num_classes; ++c)
            os << ',' << iodetail::fmt(r.pr.recall[static_cast<std::size_t>(c)]);
        for (int c = 0; c < num_classes; ++c)
            os << ',' << iodetail::fmt(r.per_class_accuracy[static_cast<std::size_t>(c)]);
        os << '\n';
    }
}

/// Parsed metrics table: header names plus rows of optional cells.
struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::runtime_error("metrics csv: missing column '" + name + "'");
    }
};

inline MetricsTable read_metrics_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kMetricsSchema)
        throw std::runtime_error("metrics csv: unknown schema version (expected '" +
                                 std::string(kMetricsSchema) + "')");
    MetricsTable t;
    if (!std::getline(is, line)) throw std::runtime_error("metrics csv: missing header");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::optional<double>> row;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            std::string c = line.substr(start, pos == std::string::npos ? pos : pos - start);
            if (c.empty())
                row.push_back(std::nullopt);
            else
                row.push_back(std::stod(c));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (row.size() != t.columns.size())
            throw std::runtime_error("metrics csv: row width mismatch");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline MetricsTable read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open metrics csv: " + path);
    return read_metrics_csv(is);
}

}  // namespace inpl
