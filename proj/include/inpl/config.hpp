#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "inpl/data.hpp"
#include "inpl/trainer.hpp"

namespace inpl {

using json = nlohmann::json;

/// Everything a run needs: the dataset recipe, the training recipe, and
/// where the dataset file lives. Unknown keys are rejected so typos fail
/// loudly; defaults are materialized back out for provenance.
struct ExperimentConfig {
    // dataset
    LongTailSpec longtail;
    std::size_t dim = 2;
    long test_per_class = 200;
    double radius = 2.0;
    double cov_scale = 1.0;
    std::uint64_t data_seed = 0;
    double ood_fraction = 0.0;
    std::vector<std::vector<double>> ood_means;  // default: single component at origin
    double ood_scale = 1.0;
    std::uint64_t ood_seed = 1;

    std::string dataset_file = "dataset.bin";

    TrainConfig train;

    MixtureSpec mixture() const {
        MixtureSpec mix = MixtureSpec::default_geometry(longtail.num_classes, dim, radius, cov_scale);
        if (ood_means.empty()) {
            mix.ood_means.push_back(std::vector<double>(dim, 0.0));
        } else {
            mix.ood_means = ood_means;
        }
        mix.ood_scale = ood_scale;
        return mix;
    }

    SSLDataset build_dataset() const {
        SSLDataset ds = make_dataset(longtail, mixture(), test_per_class, data_seed);
        if (ood_fraction > 0.0) ds = inject_ood(std::move(ds), ood_fraction, mixture(), ood_seed);
        return ds;
    }
};

namespace cfgdetail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace cfgdetail

inline OptimizerConfig parse_optimizer(const json& j) {
    cfgdetail::check_keys(j, {"kind", "learning_rate", "momentum", "beta1", "beta2", "eps"},
                          "train.optimizer");
    OptimizerConfig c;
    std::string kind = "sgd";
    cfgdetail::get_if(j, "kind", kind);
    if (kind == "sgd")
        c.kind = OptimizerKind::SgdMomentum;
    else if (kind == "adam")
        c.kind = OptimizerKind::Adam;
    else
        throw std::invalid_argument("config: optimizer kind must be 'sgd' or 'adam'");
    if (kind == "adam") c.learning_rate = 0.002;
    cfgdetail::get_if(j, "learning_rate", c.learning_rate);
    cfgdetail::get_if(j, "momentum", c.momentum);
    cfgdetail::get_if(j, "beta1", c.beta1);
    cfgdetail::get_if(j, "beta2", c.beta2);
    cfgdetail::get_if(j, "eps", c.eps);
    return c;
}

inline PolicyConfig parse_policy(const json& j) {
    cfgdetail::check_keys(
        j, {"kind", "tau_c", "tau_e", "temperature", "sharpen_t", "calibration"}, "train.policy");
    PolicyConfig c;
    std::string kind = "confidence";
    cfgdetail::get_if(j, "kind", kind);
    if (kind == "confidence")
        c.kind = PolicyKind::Confidence;
    else if (kind == "energy")
        c.kind = PolicyKind::Energy;
    else if (kind == "soft")
        c.kind = PolicyKind::Soft;
    else
        throw std::invalid_argument("config: policy kind must be 'confidence', 'energy' or 'soft'");
    cfgdetail::get_if(j, "tau_c", c.tau_c);
    cfgdetail::get_if(j, "tau_e", c.tau_e);
    cfgdetail::get_if(j, "temperature", c.temperature);
    cfgdetail::get_if(j, "sharpen_t", c.sharpen_t);
    if (j.contains("calibration")) {
        const json& cal = j.at("calibration");
        cfgdetail::check_keys(cal, {"mode", "quantile", "interval"}, "train.policy.calibration");
        std::string mode = "fixed";
        cfgdetail::get_if(cal, "mode", mode);
        if (mode == "fixed")
            c.calibration = EnergyCalibration::Fixed;
        else if (mode == "labeled_quantile")
            c.calibration = EnergyCalibration::LabeledQuantile;
        else
            throw std::invalid_argument("config: calibration mode must be 'fixed' or 'labeled_quantile'");
        cfgdetail::get_if(cal, "quantile", c.calibration_quantile);
        cfgdetail::get_if(cal, "interval", c.calibration_interval);
    }
    c.validate();
    return c;
}

inline TrainConfig parse_train(const json& j) {
    cfgdetail::check_keys(
        j,
        {"iterations", "batch_labeled", "batch_unlabeled", "strong_views", "optimizer", "policy",
         "loss_variant", "lambda_u", "margin_scale", "prior_momentum", "augment", "ema_momentum",
         "eval_interval", "seed", "hidden", "supervised_only", "minority_classes", "group_head",
         "group_tail"},
        "train");
    TrainConfig c;
    cfgdetail::get_if(j, "iterations", c.iterations);
    cfgdetail::get_if(j, "batch_labeled", c.batch_labeled);
    cfgdetail::get_if(j, "batch_unlabeled", c.batch_unlabeled);
    cfgdetail::get_if(j, "strong_views", c.strong_views);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer"));
    if (j.contains("policy")) c.policy = parse_policy(j.at("policy"));
    if (j.contains("loss_variant")) {
        std::string v = j.at("loss_variant").get<std::string>();
        if (v == "ce")
            c.loss_variant = LossVariant::CrossEntropy;
        else if (v == "aml")
            c.loss_variant = LossVariant::AdaptiveMargin;
        else
            throw std::invalid_argument("config: loss_variant must be 'ce' or 'aml'");
    }
    cfgdetail::get_if(j, "lambda_u", c.lambda_u);
    cfgdetail::get_if(j, "margin_scale", c.margin_scale);
    cfgdetail::get_if(j, "prior_momentum", c.prior_momentum);
    if (j.contains("augment")) {
        const json& a = j.at("augment");
        cfgdetail::check_keys(a, {"weak_noise", "strong_noise", "mask_rate", "mask_fill"},
                              "train.augment");
        cfgdetail::get_if(a, "weak_noise", c.augment.weak_noise);
        cfgdetail::get_if(a, "strong_noise", c.augment.strong_noise);
        cfgdetail::get_if(a, "mask_rate", c.augment.mask_rate);
        cfgdetail::get_if(a, "mask_fill", c.augment.mask_fill);
    }
    cfgdetail::get_if(j, "ema_momentum", c.ema_momentum);
    cfgdetail::get_if(j, "eval_interval", c.eval_interval);
    cfgdetail::get_if(j, "seed", c.seed);
    cfgdetail::get_if(j, "hidden", c.hidden);
    cfgdetail::get_if(j, "supervised_only", c.supervised_only);
    cfgdetail::get_if(j, "minority_classes", c.minority_classes);
    cfgdetail::get_if(j, "group_head", c.group_head);
    cfgdetail::get_if(j, "group_tail", c.group_tail);
    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const json& j) {
    cfgdetail::check_keys(j, {"dataset", "dataset_file", "train"}, "top level");
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        cfgdetail::check_keys(d,
                              {"classes", "dim", "gamma", "n1", "mode", "m1", "d_total",
                               "test_per_class", "radius", "cov_scale", "seed", "ood"},
                              "dataset");
        cfgdetail::get_if(d, "classes", c.longtail.num_classes);
        cfgdetail::get_if(d, "dim", c.dim);
        cfgdetail::get_if(d, "gamma", c.longtail.gamma);
        cfgdetail::get_if(d, "n1", c.longtail.n1);
        if (d.contains("mode")) {
            std::string m = d.at("mode").get<std::string>();
            if (m == "dual")
                c.longtail.mode = LongTailMode::DualExponential;
            else if (m == "complement")
                c.longtail.mode = LongTailMode::Complement;
            else
                throw std::invalid_argument("config: dataset.mode must be 'dual' or 'complement'");
        }
        cfgdetail::get_if(d, "m1", c.longtail.m1);
        cfgdetail::get_if(d, "d_total", c.longtail.total_per_class);
        cfgdetail::get_if(d, "test_per_class", c.test_per_class);
        cfgdetail::get_if(d, "radius", c.radius);
        cfgdetail::get_if(d, "cov_scale", c.cov_scale);
        cfgdetail::get_if(d, "seed", c.data_seed);
        if (d.contains("ood")) {
            const json& o = d.at("ood");
            cfgdetail::check_keys(o, {"fraction", "means", "scale", "seed"}, "dataset.ood");
            cfgdetail::get_if(o, "fraction", c.ood_fraction);
            cfgdetail::get_if(o, "means", c.ood_means);
            cfgdetail::get_if(o, "scale", c.ood_scale);
            cfgdetail::get_if(o, "seed", c.ood_seed);
        }
        c.longtail.validate();
    }
    cfgdetail::get_if(j, "dataset_file", c.dataset_file);
    if (j.contains("train")) c.train = parse_train(j.at("train"));
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config: " + path);
    json j;
    is >> j;
    return parse_config(j);
}

/// Fully-resolved echo of the configuration, defaults included.
inline json resolve_config(const ExperimentConfig& c) {
    json j;
    json d;
    d["classes"] = c.longtail.num_classes;
    d["dim"] = c.dim;
    d["gamma"] = c.longtail.gamma;
    d["n1"] = c.longtail.n1;
    d["mode"] = c.longtail.mode == LongTailMode::DualExponential ? "dual" : "complement";
    d["m1"] = c.longtail.m1;
    d["d_total"] = c.longtail.total_per_class;
    d["test_per_class"] = c.test_per_class;
    d["radius"] = c.radius;
    d["cov_scale"] = c.cov_scale;
    d["seed"] = c.data_seed;
    json o;
    o["fraction"] = c.ood_fraction;
    o["means"] = c.ood_means.empty()
                     ? std::vector<std::vector<double>>{std::vector<double>(c.dim, 0.0)}
                     : c.ood_means;
    o["scale"] = c.ood_scale;
    o["seed"] = c.ood_seed;
    d["ood"] = o;
    j["dataset"] = d;
    j["dataset_file"] = c.dataset_file;

    const TrainConfig& t = c.train;
    json tr;
    tr["iterations"] = t.iterations;
    tr["batch_labeled"] = t.batch_labeled;
    tr["batch_unlabeled"] = t.batch_unlabeled;
    tr["strong_views"] = t.strong_views;
    json opt;
    opt["kind"] = t.optimizer.kind == OptimizerKind::SgdMomentum ? "sgd" : "adam";
    opt["learning_rate"] = t.optimizer.learning_rate;
    opt["momentum"] = t.optimizer.momentum;
    opt["beta1"] = t.optimizer.beta1;
    opt["beta2"] = t.optimizer.beta2;
    opt["eps"] = t.optimizer.eps;
    tr["optimizer"] = opt;
    json pol;
    pol["kind"] = t.policy.kind == PolicyKind::Confidence
                      ? "confidence"
                      : (t.policy.kind == PolicyKind::Energy ? "energy" : "soft");
    pol["tau_c"] = t.policy.tau_c;
    pol["tau_e"] = t.policy.tau_e;
    pol["temperature"] = t.policy.temperature;
    pol["sharpen_t"] = t.policy.sharpen_t;
    json cal;
    cal["mode"] =
        t.policy.calibration == EnergyCalibration::Fixed ? "fixed" : "labeled_quantile";
    cal["quantile"] = t.policy.calibration_quantile;
    cal["interval"] = t.policy.calibration_interval;
    pol["calibration"] = cal;
    tr["policy"] = pol;
    tr["loss_variant"] = t.loss_variant == LossVariant::CrossEntropy ? "ce" : "aml";
    tr["lambda_u"] = t.lambda_u;
    tr["margin_scale"] = t.margin_scale;
    tr["prior_momentum"] = t.prior_momentum;
    json aug;
    aug["weak_noise"] = t.augment.weak_noise;
    aug["strong_noise"] = t.augment.strong_noise;
    aug["mask_rate"] = t.augment.mask_rate;
    aug["mask_fill"] = t.augment.mask_fill;
    tr["augment"] = aug;
    tr["ema_momentum"] = t.ema_momentum;
    tr["eval_interval"] = t.eval_interval;
    tr["seed"] = t.seed;
    tr["hidden"] = t.hidden;
    tr["supervised_only"] = t.supervised_only;
    tr["minority_classes"] = t.minority_classes;
    tr["group_head"] = t.group_head;
    tr["group_tail"] = t.group_tail;
    j["train"] = tr;
    return j;
}

}  // namespace inpl
