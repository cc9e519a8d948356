// Experiment driver: generate synthetic long-tail SSL datasets, train
// pseudo-labeling runs, sweep thresholds, and render report figures.

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inpl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"inpl: energy-based inlier pseudo-labeling laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_path, axis, values_arg, in_arg;

    auto* gen = app.add_subcommand("gen-data", "generate a dataset file");
    gen->add_option("--config", config_path, "experiment config (JSON)")->required();
    gen->add_option("--out", out_path, "output dataset file")->required();

    auto* train = app.add_subcommand("train", "run one training experiment");
    train->add_option("--config", config_path, "experiment config (JSON)")->required();
    train->add_option("--out", out_path, "output run directory")->required();

    auto* sweep = app.add_subcommand("sweep", "one run per value of a hyperparameter");
    sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--axis", axis, "tau_c | tau_e | T | lambda_m")->required();
    sweep->add_option("--values", values_arg, "comma-separated values")->required();
    sweep->add_option("--out", out_path, "output sweep directory")->required();

    auto* report = app.add_subcommand("report", "render figures from run directories");
    report->add_option("--in", in_arg, "run directory (comma-separated for several)")->required();
    report->add_option("--out", out_path, "output figure directory")->required();

    CLI11_PARSE(app, argc, argv);

    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = s.find(',', start);
            parts.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return parts;
    };

    if (gen->parsed()) return inpl::cli::run_gen_data(config_path, out_path);
    if (train->parsed()) return inpl::cli::run_train(config_path, out_path);
    if (sweep->parsed()) {
        std::vector<double> values;
        try {
            for (const auto& p : split(values_arg)) values.push_back(std::stod(p));
        } catch (const std::exception&) {
            std::cerr << "error: bad value list '" << values_arg << "'\n";
            return inpl::cli::kValidationError;
        }
        return inpl::cli::run_sweep(config_path, axis, values, out_path);
    }
    if (report->parsed()) return inpl::cli::run_report(split(in_arg), out_path);
    return inpl::cli::kValidationError;
}
