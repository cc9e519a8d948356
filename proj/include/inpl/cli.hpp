#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/config.hpp"
#include "inpl/report.hpp"
#include "inpl/run_io.hpp"
#include "inpl/trainer.hpp"

namespace inpl::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kRuntimeFailure = 2;

inline constexpr const char* kOutputRootEnv = "INPL_OUT_ROOT";

/// Relative outputs land under $INPL_OUT_ROOT when it is set.
inline std::string resolve_out(const std::string& path) {
    namespace fs = std::filesystem;
    const char* root = std::getenv(kOutputRootEnv);
    if (root && *root && fs::path(path).is_relative())
        return (fs::path(root) / path).string();
    return path;
}

inline int run_gen_data(const std::string& config_path, const std::string& out_path,
                        std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        SSLDataset ds = cfg.build_dataset();
        std::string out_file = resolve_out(out_path);
        if (auto dir = std::filesystem::path(out_file).parent_path(); !dir.empty())
            std::filesystem::create_directories(dir);
        save_dataset(ds, out_file);
        LongTailCounts counts = longtail_counts(cfg.longtail);
        out << "wrote " << out_file << "\n";
        out << "class labeled unlabeled\n";
        for (int k = 0; k < cfg.longtail.num_classes; ++k)
            out << k << ' ' << counts.labeled[static_cast<std::size_t>(k)] << ' '
                << counts.unlabeled[static_cast<std::size_t>(k)] << "\n";
        long ood = static_cast<long>(ds.unlabeled_x.size()) -
                   static_cast<long>(std::accumulate(counts.unlabeled.begin(),
                                                     counts.unlabeled.end(), 0L));
        if (ood > 0) out << "ood " << ood << "\n";
        return kOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

/// Writes metrics.csv, summary.json, checkpoint.bin and the resolved config
/// into out_dir. Returns kRuntimeFailure (partial outputs kept) when the
/// loss goes non-finite.
inline int run_train(const std::string& config_path, const std::string& out_dir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    }
    try {
        std::string dir = resolve_out(out_dir);
        std::filesystem::create_directories(dir);
        SSLDataset ds = load_dataset(cfg.dataset_file);
        Trainer trainer(cfg.train, ds);
        trainer.run();
        const RunMetrics& metrics = trainer.metrics();

        {
            std::ofstream os(dir + "/config.json", std::ios::trunc);
            os << resolve_config(cfg).dump(2) << "\n";
        }
        {
            std::ofstream os(dir + "/metrics.csv", std::ios::trunc);
            write_metrics_csv(metrics, ds.num_classes, os);
        }
        trainer.save_checkpoint(dir + "/checkpoint.bin");

        json summary;
        summary["config"] = resolve_config(cfg);
        summary["aborted"] = metrics.aborted;
        if (metrics.aborted) {
            summary["abort_reason"] = metrics.abort_reason;
            summary["abort_iteration"] = metrics.abort_iteration;
        }
        if (!metrics.records.empty()) {
            double best = 0.0;
            for (const auto& r : metrics.records) best = std::max(best, r.test_accuracy);
            summary["final_accuracy"] = metrics.records.back().test_accuracy;
            summary["best_accuracy"] = best;
            summary["final_minority_accuracy"] = metrics.records.back().minority_accuracy;
        }
        {
            std::ofstream os(dir + "/summary.json", std::ios::trunc);
            os << summary.dump(2) << "\n";
        }
        if (metrics.aborted) {
            err << "run aborted: " << metrics.abort_reason << "\n";
            return kRuntimeFailure;
        }
        out << "run complete: final accuracy "
            << (metrics.records.empty() ? 0.0 : metrics.records.back().test_accuracy) << "\n";
        return kOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

inline void apply_axis(TrainConfig& t, const std::string& axis, double value) {
    if (axis == "tau_c")
        t.policy.tau_c = value;
    else if (axis == "tau_e") {
        t.policy.tau_e = value;
        t.policy.calibration = EnergyCalibration::Fixed;
    } else if (axis == "T")
        t.policy.temperature = value;
    else if (axis == "lambda_m")
        t.margin_scale = value;
    else
        throw std::invalid_argument("sweep: unknown axis '" + axis +
                                    "' (expected tau_c, tau_e, T or lambda_m)");
}

/// One training run per value, identical seeds otherwise; writes per-value
/// run directories plus sweep.csv.
inline int run_sweep(const std::string& config_path, const std::string& axis,
                     const std::vector<double>& values, const std::string& out_dir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (values.empty()) throw std::invalid_argument("sweep: empty values list");
        TrainConfig probe = cfg.train;
        apply_axis(probe, axis, values[0]);  // validate the axis up front
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    }
    try {
        std::string dir = resolve_out(out_dir);
        std::filesystem::create_directories(dir);
        SSLDataset ds = load_dataset(cfg.dataset_file);
        std::ostringstream csv;
        csv << "# inpl-sweep v1\n";
        csv << "axis,value,final_accuracy,best_accuracy,tail_recall,micro_precision,accept_rate\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            ExperimentConfig run_cfg = cfg;
            apply_axis(run_cfg.train, axis, values[i]);
            Trainer trainer(run_cfg.train, ds);
            trainer.run();
            const RunMetrics& m = trainer.metrics();
            if (m.aborted) {
                err << "sweep run " << values[i] << " aborted: " << m.abort_reason << "\n";
                return kRuntimeFailure;
            }
            std::string run_dir = dir + "/run_" + std::to_string(i);
            std::filesystem::create_directories(run_dir);
            {
                std::ofstream os(run_dir + "/metrics.csv", std::ios::trunc);
                write_metrics_csv(m, ds.num_classes, os);
            }
            {
                std::ofstream os(run_dir + "/config.json", std::ios::trunc);
                os << resolve_config(run_cfg).dump(2) << "\n";
            }
            const EvalRecord& last = m.records.back();
            double best = 0.0;
            for (const auto& r : m.records) best = std::max(best, r.test_accuracy);
            csv << axis << ',' << iodetail::fmt(values[i]) << ',' << iodetail::fmt(last.test_accuracy)
                << ',' << iodetail::fmt(best) << ',' << iodetail::fmt(last.group_pr.tail_recall)
                << ',' << iodetail::fmt_opt(last.pr.micro_precision) << ','
                << iodetail::fmt(last.accept_rate) << '\n';
        }
        std::ofstream os(dir + "/sweep.csv", std::ios::trunc);
        os << csv.str();
        out << "sweep complete: " << values.size() << " runs in " << dir << "\n";
        return kOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

inline int run_report(const std::vector<std::string>& in_dirs, const std::string& out_dir,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        if (in_dirs.empty()) throw std::invalid_argument("report: no input directories");
        std::vector<RunTable> runs;
        for (const auto& d : in_dirs) {
            RunTable rt;
            rt.name = std::filesystem::path(d).filename().string();
            rt.table = read_metrics_csv(d + "/metrics.csv");
            runs.push_back(std::move(rt));
        }
        std::string dir = resolve_out(out_dir);
        std::filesystem::create_directories(dir);
        write_report_figures(runs, dir);
        out << "report written to " << dir << "\n";
        return kOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

}  // namespace inpl::cli
