#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/data.hpp"
#include "inpl/losses.hpp"
#include "inpl/metrics.hpp"
#include "inpl/mlp.hpp"
#include "inpl/optim.hpp"
#include "inpl/policy.hpp"

namespace inpl {

struct TrainConfig {
    long iterations = 5000;
    int batch_labeled = 64;
    int batch_unlabeled = 64;
    int strong_views = 1;
    OptimizerConfig optimizer;
    PolicyConfig policy;
    LossVariant loss_variant = LossVariant::CrossEntropy;
    double lambda_u = 1.0;        // unsupervised loss weight
    double margin_scale = 0.5;    // lambda_m
    double prior_momentum = 0.999;
    AugmentConfig augment;
    double ema_momentum = 0.999;
    long eval_interval = 250;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {64, 64};
    bool supervised_only = false;
    int minority_classes = -1;    // -1: bottom half of classes by labeled count
    int group_head = -1;          // -1: max(1, 3K/10), mirrors head/tail of 3 at K=10
    int group_tail = -1;

    /// Experiment-harness hook: invoked once, at the start of the given
    /// iteration, with the live model; may rewrite the policy (e.g. reset
    /// tau_e). Not serialized; must be deterministic for reproducible runs.
    long policy_hook_iteration = -1;
    std::function<void(long, const Mlpd&, PolicyConfig&)> policy_hook;

    void validate() const {
        if (iterations < 0) throw std::invalid_argument("train: iterations >= 0 required");
        if (batch_labeled < 1 || batch_unlabeled < 1)
            throw std::invalid_argument("train: batch sizes >= 1 required");
        if (strong_views < 1) throw std::invalid_argument("train: strong views >= 1 required");
        if (eval_interval < 1) throw std::invalid_argument("train: eval interval >= 1 required");
        if (!(ema_momentum >= 0.0 && ema_momentum < 1.0))
            throw std::invalid_argument("train: ema momentum must be in [0,1)");
        policy.validate();
        augment.validate();
    }

    GroupSpec groups(int num_classes) const {
        GroupSpec g;
        g.head = group_head >= 0 ? group_head : std::max(1, 3 * num_classes / 10);
        g.tail = group_tail >= 0 ? group_tail : std::max(1, 3 * num_classes / 10);
        return g;
    }
};

struct EvalRecord {
    long iteration = 0;
    bool has_losses = false;  // false only for the pre-training record
    double loss_s = 0.0;      // mean over steps since the previous record
    double loss_u = 0.0;
    double accept_rate = 0.0;
    PseudoLabelPR pr;
    GroupPR group_pr;
    long ood_accepted_eval = 0;        // snapshot over the whole unlabeled pool
    long ood_accepted_cumulative = 0;  // accumulated over training batches
    double test_accuracy = 0.0;
    double minority_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
};

struct RunMetrics {
    std::vector<EvalRecord> records;
    bool aborted = false;
    std::string abort_reason;
    long abort_iteration = -1;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<double> per_class;
    double minority_accuracy = 0.0;
};

/// Balanced-test-set accuracy summary for one parameter snapshot.
inline EvalReport evaluate(const Mlpd& model, const std::vector<std::vector<double>>& test_x,
                           const std::vector<int>& test_y,
                           const std::vector<std::size_t>& minority) {
    if (test_x.empty()) throw std::invalid_argument("evaluate: empty test set");
    std::size_t k = model.num_classes();
    std::vector<long> correct(k, 0), total(k, 0);
    for (std::size_t i = 0; i < test_x.size(); ++i) {
        auto logits = model.forward_one(test_x[i]);
        std::size_t pred = argmax_lowest_tie(logits);
        std::size_t y = static_cast<std::size_t>(test_y[i]);
        total[y] += 1;
        if (pred == y) correct[y] += 1;
    }
    EvalReport r;
    long all_correct = 0, all_total = 0;
    r.per_class.resize(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        all_correct += correct[c];
        all_total += total[c];
        r.per_class[c] = total[c] > 0 ? static_cast<double>(correct[c]) / total[c] : 0.0;
    }
    r.accuracy = static_cast<double>(all_correct) / all_total;
    double acc = 0.0;
    for (std::size_t c : minority) acc += r.per_class[c];
    r.minority_accuracy = minority.empty() ? 0.0 : acc / static_cast<double>(minority.size());
    return r;
}

/// Single-owner training loop: weak/strong views, pseudo-label decisions,
/// loss assembly, optimizer step, EMA model, prior tracker, diagnostics.
/// Hidden unlabeled truth is only touched in record_metrics_* paths.
class Trainer {
public:
    Trainer(TrainConfig cfg, const SSLDataset& ds) : cfg_(std::move(cfg)), ds_(ds) {
        cfg_.validate();
        if (ds_.labeled_x.empty() || ds_.unlabeled_x.empty() || ds_.test_x.empty())
            throw std::invalid_argument("train: dataset has an empty split");
        rng_ = Rng(cfg_.seed);
        model_ = Mlpd::init(ds_.dim, cfg_.hidden, static_cast<std::size_t>(ds_.num_classes), rng_);
        ema_params_ = model_.params;
        opt_ = OptimizerState<double>::init(cfg_.optimizer, model_.params);
        prior_ = PriorTracker::uniform(ds_.num_classes, cfg_.prior_momentum, cfg_.margin_scale);
        policy_ = cfg_.policy;
        labeled_order_.resize(ds_.labeled_x.size());
        std::iota(labeled_order_.begin(), labeled_order_.end(), 0);
        unlabeled_order_.resize(ds_.unlabeled_x.size());
        std::iota(unlabeled_order_.begin(), unlabeled_order_.end(), 0);
        labeled_counts_ = class_counts(ds_.labeled_y, ds_.num_classes);
        minority_ = minority_classes(labeled_counts_, cfg_.minority_classes);
        record_eval();
    }

    void run() { run_until(cfg_.iterations); }

    void run_until(long iterations) {
        while (iter_ < iterations && !metrics_.aborted) {
            step();
            if (metrics_.aborted) break;
            if (iter_ % cfg_.eval_interval == 0 || iter_ == cfg_.iterations) record_eval();
        }
    }

    const RunMetrics& metrics() const { return metrics_; }
    const Mlpd& model() const { return model_; }
    const std::vector<Tensord>& ema_params() const { return ema_params_; }
    const PolicyConfig& policy() const { return policy_; }
    const PriorTracker& prior() const { return prior_; }
    long iteration() const { return iter_; }
    const std::vector<long>& labeled_counts() const { return labeled_counts_; }
    const std::vector<std::size_t>& minority() const { return minority_; }

    Mlpd ema_model() const {
        Mlpd m = model_;
        m.params = ema_params_;
        return m;
    }

    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

    static std::vector<long> class_counts(const std::vector<int>& labels, int num_classes) {
        std::vector<long> c(static_cast<std::size_t>(num_classes), 0);
        for (int y : labels) c[static_cast<std::size_t>(y)] += 1;
        return c;
    }

    static std::vector<std::size_t> minority_classes(const std::vector<long>& labeled_counts,
                                                     int requested) {
        std::size_t k = labeled_counts.size();
        std::size_t n = requested >= 0 ? static_cast<std::size_t>(requested) : k / 2;
        n = std::min(n, k);
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (labeled_counts[a] != labeled_counts[b]) return labeled_counts[a] < labeled_counts[b];
            return a < b;
        });
        std::vector<std::size_t> m(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(m.begin(), m.end());
        return m;
    }

    /// q-quantile (linear interpolation) of the model's energies over the
    /// labeled features; the default tau_e calibration rule.
    static double labeled_energy_quantile(const Mlpd& model,
                                          const std::vector<std::vector<double>>& labeled_x,
                                          double temperature, double q) {
        std::vector<double> e;
        e.reserve(labeled_x.size());
        for (const auto& x : labeled_x) e.push_back(energy_score(model.forward_one(x), temperature));
        std::sort(e.begin(), e.end());
        if (e.size() == 1) return e[0];
        double pos = q * static_cast<double>(e.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, e.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return e[lo] + frac * (e[hi] - e[lo]);
    }

private:
    void step() {
        if (cfg_.policy_hook && iter_ == cfg_.policy_hook_iteration)
            cfg_.policy_hook(iter_, model_, policy_);
        if (policy_.kind == PolicyKind::Energy &&
            policy_.calibration == EnergyCalibration::LabeledQuantile &&
            iter_ % policy_.calibration_interval == 0)
            policy_.tau_e = labeled_energy_quantile(model_, ds_.labeled_x, policy_.temperature,
                                                    policy_.calibration_quantile);

        auto lab_idx = draw_batch(labeled_order_, labeled_cursor_, cfg_.batch_labeled);
        auto unl_idx = draw_batch(unlabeled_order_, unlabeled_cursor_, cfg_.batch_unlabeled);

        // weak views
        Tensord xs = Tensord::zeros({lab_idx.size(), ds_.dim});
        std::vector<int> ys(lab_idx.size());
        for (std::size_t i = 0; i < lab_idx.size(); ++i) {
            auto v = augment(ds_.labeled_x[lab_idx[i]], AugmentKind::Weak, cfg_.augment, rng_);
            std::copy(v.begin(), v.end(), xs.values.begin() + static_cast<std::ptrdiff_t>(i * ds_.dim));
            ys[i] = ds_.labeled_y[lab_idx[i]];
        }
        std::vector<std::vector<double>> weak_u(unl_idx.size());
        for (std::size_t i = 0; i < unl_idx.size(); ++i)
            weak_u[i] = augment(ds_.unlabeled_x[unl_idx[i]], AugmentKind::Weak, cfg_.augment, rng_);

        // strong views, grouped per view index
        std::vector<Tensord> strong(static_cast<std::size_t>(cfg_.strong_views),
                                    Tensord::zeros({unl_idx.size(), ds_.dim}));
        for (std::size_t i = 0; i < unl_idx.size(); ++i)
            for (int v = 0; v < cfg_.strong_views; ++v) {
                auto s = augment(ds_.unlabeled_x[unl_idx[i]], AugmentKind::Strong, cfg_.augment, rng_);
                std::copy(s.begin(), s.end(),
                          strong[static_cast<std::size_t>(v)].values.begin() +
                              static_cast<std::ptrdiff_t>(i * ds_.dim));
            }

        // pseudo-label decisions on detached weak-view logits
        std::vector<std::vector<double>> weak_logits(unl_idx.size());
        std::vector<std::vector<double>> weak_probs(unl_idx.size());
        for (std::size_t i = 0; i < unl_idx.size(); ++i) {
            weak_logits[i] = model_.forward_one(weak_u[i]);
            weak_probs[i] = softmax(weak_logits[i]);
        }
        auto decisions = decide_batch(weak_logits, policy_);

        std::vector<double> delta = margins(prior_);

        Graph<double> g;
        auto param_ids = mlp_param_leaves(g, model_);
        auto ls_node = supervised_loss_node(
            g, mlp_forward_graph(g, model_, param_ids, g.constant(xs)), ys);
        double loss_s = g.value(ls_node).values[0];
        double loss_u = 0.0;
        auto total = ls_node;
        if (!cfg_.supervised_only) {
            typename Graph<double>::NodeId lu_node = 0;
            for (int v = 0; v < cfg_.strong_views; ++v) {
                auto logits = mlp_forward_graph(g, model_, param_ids,
                                                g.constant(strong[static_cast<std::size_t>(v)]));
                auto term = unsupervised_loss_node(g, logits, decisions, cfg_.loss_variant, delta,
                                                   unl_idx.size());
                lu_node = v == 0 ? term : g.add(lu_node, term);
            }
            if (cfg_.strong_views > 1)
                lu_node = g.scale(lu_node, 1.0 / static_cast<double>(cfg_.strong_views));
            loss_u = g.value(lu_node).values[0];
            total = g.add(ls_node, g.scale(lu_node, cfg_.lambda_u));
        }

        double total_value = g.value(total).values[0];
        if (!std::isfinite(total_value)) {
            abort_run("non-finite loss at iteration " + std::to_string(iter_));
            return;
        }
        g.backward(total);
        std::vector<Tensord> grads;
        grads.reserve(param_ids.size());
        for (auto id : param_ids) grads.push_back(g.grad(id));
        try {
            optimizer_step(opt_, model_.params, grads);
        } catch (const std::runtime_error& e) {
            abort_run(std::string(e.what()) + " at iteration " + std::to_string(iter_));
            return;
        }
        ema_update_inplace(ema_params_, model_.params, cfg_.ema_momentum);
        update_prior(prior_, weak_probs);

        // diagnostics only below this point
        std::vector<int> batch_truth(unl_idx.size());
        for (std::size_t i = 0; i < unl_idx.size(); ++i) batch_truth[i] = ds_.diagnostics()[unl_idx[i]];
        ood_cumulative_ += ood_acceptance_count(decisions, batch_truth);
        loss_s_sum_ += loss_s;
        loss_u_sum_ += loss_u;
        steps_since_record_ += 1;
        iter_ += 1;
    }

    void abort_run(const std::string& reason) {
        metrics_.aborted = true;
        metrics_.abort_reason = reason;
        metrics_.abort_iteration = iter_;
    }

    std::vector<std::size_t> draw_batch(std::vector<std::size_t>& order, std::size_t& cursor,
                                        int batch) {
        std::vector<std::size_t> idx;
        idx.reserve(static_cast<std::size_t>(batch));
        for (int i = 0; i < batch; ++i) {
            if (cursor == 0) rng_.shuffle(order);
            idx.push_back(order[cursor]);
            cursor = (cursor + 1) % order.size();
        }
        return idx;
    }

    void record_eval() {
        EvalRecord rec;
        rec.iteration = iter_;
        if (steps_since_record_ > 0) {
            rec.has_losses = true;
            rec.loss_s = loss_s_sum_ / static_cast<double>(steps_since_record_);
            rec.loss_u = loss_u_sum_ / static_cast<double>(steps_since_record_);
        }
        loss_s_sum_ = loss_u_sum_ = 0.0;
        steps_since_record_ = 0;

        Mlpd ema = ema_model();
        std::vector<std::vector<double>> logits(ds_.unlabeled_x.size());
        for (std::size_t i = 0; i < ds_.unlabeled_x.size(); ++i)
            logits[i] = ema.forward_one(ds_.unlabeled_x[i]);
        auto decisions = decide_batch(logits, policy_);
        long accepted = 0;
        for (const auto& d : decisions) accepted += d.accepted ? 1 : 0;
        rec.accept_rate = static_cast<double>(accepted) / static_cast<double>(decisions.size());
        rec.pr = pseudo_label_pr(decisions, ds_.diagnostics(), ds_.num_classes);
        rec.group_pr = group_summary(rec.pr, labeled_counts_, cfg_.groups(ds_.num_classes));
        rec.ood_accepted_eval = ood_acceptance_count(decisions, ds_.diagnostics());
        rec.ood_accepted_cumulative = ood_cumulative_;

        EvalReport rep = evaluate(ema, ds_.test_x, ds_.test_y, minority_);
        rec.test_accuracy = rep.accuracy;
        rec.minority_accuracy = rep.minority_accuracy;
        rec.per_class_accuracy = rep.per_class;
        metrics_.records.push_back(std::move(rec));
    }

    TrainConfig cfg_;
    const SSLDataset& ds_;
    Rng rng_{0};
    Mlpd model_;
    std::vector<Tensord> ema_params_;
    OptimizerState<double> opt_;
    PriorTracker prior_;
    PolicyConfig policy_;
    std::vector<std::size_t> labeled_order_, unlabeled_order_;
    std::size_t labeled_cursor_ = 0, unlabeled_cursor_ = 0;
    std::vector<long> labeled_counts_;
    std::vector<std::size_t> minority_;
    long iter_ = 0;
    long ood_cumulative_ = 0;
    double loss_s_sum_ = 0.0, loss_u_sum_ = 0.0;
    long steps_since_record_ = 0;
    RunMetrics metrics_;
};

inline RunMetrics train(const TrainConfig& cfg, const SSLDataset& ds) {
    Trainer t(cfg, ds);
    t.run();
    return t.metrics();
}

// ---------------------------------------------------------------------------
// Checkpoint format (version 1): everything needed to make a resumed run
// bit-identical to an uninterrupted one, metrics included.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_tensor(std::ostream& os, const Tensord& t) {
    write_pod(os, static_cast<std::uint64_t>(t.shape.size()));
    for (auto d : t.shape) write_pod(os, static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(t.values.data()),
             static_cast<std::streamsize>(t.values.size() * sizeof(double)));
}

inline Tensord read_tensor(std::istream& is) {
    std::uint64_t rank = read_pod<std::uint64_t>(is);
    std::vector<std::size_t> shape;
    for (std::uint64_t i = 0; i < rank; ++i)
        shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(is)));
    Tensord t = Tensord::zeros(shape);
    is.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor");
    return t;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_pod(os, static_cast<std::uint64_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    std::uint64_t n = read_pod<std::uint64_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("checkpoint: truncated string");
    return s;
}

template <class T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
    write_pod(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
std::vector<T> read_vec(std::istream& is) {
    std::uint64_t n = read_pod<std::uint64_t>(is);
    std::vector<T> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!is) throw std::runtime_error("checkpoint: truncated vector");
    return v;
}

inline void write_record(std::ostream& os, const EvalRecord& r) {
    write_pod(os, static_cast<std::int64_t>(r.iteration));
    write_pod(os, static_cast<std::uint8_t>(r.has_losses ? 1 : 0));
    write_pod(os, r.loss_s);
    write_pod(os, r.loss_u);
    write_pod(os, r.accept_rate);
    write_vec(os, r.pr.accepted_as);
    write_vec(os, r.pr.correct_as);
    write_vec(os, r.pr.truth_count);
    write_pod(os, static_cast<std::int64_t>(r.ood_accepted_eval));
    write_pod(os, static_cast<std::int64_t>(r.ood_accepted_cumulative));
    write_pod(os, r.test_accuracy);
    write_pod(os, r.minority_accuracy);
    write_vec(os, r.per_class_accuracy);
}

inline EvalRecord read_record(std::istream& is, const std::vector<long>& labeled_counts,
                              const GroupSpec& groups) {
    EvalRecord r;
    r.iteration = static_cast<long>(read_pod<std::int64_t>(is));
    r.has_losses = read_pod<std::uint8_t>(is) != 0;
    r.loss_s = read_pod<double>(is);
    r.loss_u = read_pod<double>(is);
    r.accept_rate = read_pod<double>(is);
    r.pr.accepted_as = read_vec<long>(is);
    r.pr.correct_as = read_vec<long>(is);
    r.pr.truth_count = read_vec<long>(is);
    std::size_t k = r.pr.accepted_as.size();
    r.pr.precision.resize(k);
    r.pr.recall.resize(k, 0.0);
    long total_acc = 0, total_correct = 0;
    for (std::size_t c = 0; c < k; ++c) {
        total_acc += r.pr.accepted_as[c];
        total_correct += r.pr.correct_as[c];
        if (r.pr.accepted_as[c] > 0)
            r.pr.precision[c] = static_cast<double>(r.pr.correct_as[c]) / r.pr.accepted_as[c];
        if (r.pr.truth_count[c] > 0)
            r.pr.recall[c] = static_cast<double>(r.pr.correct_as[c]) / r.pr.truth_count[c];
    }
    if (total_acc > 0) r.pr.micro_precision = static_cast<double>(total_correct) / total_acc;
    r.group_pr = group_summary(r.pr, labeled_counts, groups);
    r.ood_accepted_eval = static_cast<long>(read_pod<std::int64_t>(is));
    r.ood_accepted_cumulative = static_cast<long>(read_pod<std::int64_t>(is));
    r.test_accuracy = read_pod<double>(is);
    r.minority_accuracy = read_pod<double>(is);
    r.per_class_accuracy = read_vec<double>(is);
    return r;
}

}  // namespace detail

inline void Trainer::save_checkpoint(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write("INPLCK1\0", 8);
    detail::write_pod(os, static_cast<std::int64_t>(iter_));
    detail::write_pod(os, static_cast<std::uint64_t>(model_.params.size()));
    for (const auto& p : model_.params) detail::write_tensor(os, p);
    for (const auto& p : ema_params_) detail::write_tensor(os, p);
    for (const auto& p : opt_.m) detail::write_tensor(os, p);
    for (const auto& p : opt_.v) detail::write_tensor(os, p);
    detail::write_pod(os, static_cast<std::int64_t>(opt_.step_count));
    detail::write_vec(os, prior_.prior);
    detail::write_pod(os, policy_.tau_e);  // may have been recalibrated
    detail::write_string(os, rng_.serialize());
    detail::write_vec(os, labeled_order_);
    detail::write_vec(os, unlabeled_order_);
    detail::write_pod(os, static_cast<std::uint64_t>(labeled_cursor_));
    detail::write_pod(os, static_cast<std::uint64_t>(unlabeled_cursor_));
    detail::write_pod(os, static_cast<std::int64_t>(ood_cumulative_));
    detail::write_pod(os, loss_s_sum_);
    detail::write_pod(os, loss_u_sum_);
    detail::write_pod(os, static_cast<std::int64_t>(steps_since_record_));
    detail::write_pod(os, static_cast<std::uint64_t>(metrics_.records.size()));
    for (const auto& r : metrics_.records) detail::write_record(os, r);
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

inline void Trainer::load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "INPLCK1\0", 8) != 0)
        throw std::runtime_error("checkpoint: bad magic/version: " + path);
    iter_ = static_cast<long>(detail::read_pod<std::int64_t>(is));
    std::uint64_t np = detail::read_pod<std::uint64_t>(is);
    if (np != model_.params.size()) throw std::runtime_error("checkpoint: parameter count mismatch");
    for (auto& p : model_.params) p = detail::read_tensor(is);
    for (auto& p : ema_params_) p = detail::read_tensor(is);
    for (auto& p : opt_.m) p = detail::read_tensor(is);
    for (auto& p : opt_.v) p = detail::read_tensor(is);
    opt_.step_count = static_cast<long>(detail::read_pod<std::int64_t>(is));
    prior_.prior = detail::read_vec<double>(is);
    policy_.tau_e = detail::read_pod<double>(is);
    rng_.deserialize(detail::read_string(is));
    labeled_order_ = detail::read_vec<std::size_t>(is);
    unlabeled_order_ = detail::read_vec<std::size_t>(is);
    labeled_cursor_ = static_cast<std::size_t>(detail::read_pod<std::uint64_t>(is));
    unlabeled_cursor_ = static_cast<std::size_t>(detail::read_pod<std::uint64_t>(is));
    ood_cumulative_ = static_cast<long>(detail::read_pod<std::int64_t>(is));
    loss_s_sum_ = detail::read_pod<double>(is);
    loss_u_sum_ = detail::read_pod<double>(is);
    steps_since_record_ = static_cast<long>(detail::read_pod<std::int64_t>(is));
    std::uint64_t nrec = detail::read_pod<std::uint64_t>(is);
    metrics_.records.clear();
    for (std::uint64_t i = 0; i < nrec; ++i)
        metrics_.records.push_back(
            detail::read_record(is, labeled_counts_, cfg_.groups(ds_.num_classes)));
    metrics_.aborted = false;
    metrics_.abort_reason.clear();
    metrics_.abort_iteration = -1;
}

}  // namespace inpl
