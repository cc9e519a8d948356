#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "inpl/autodiff.hpp"
#include "inpl/policy.hpp"

namespace inpl {

enum class LossVariant { CrossEntropy, AdaptiveMargin };

/// EMA of the model's mean predicted distribution, driving the adaptive
/// margins Delta_i = lambda_m * log(1 / p~_i).
struct PriorTracker {
    std::vector<double> prior;    // p~, sums to 1, entries >= floor
    double momentum = 0.999;      // m_p
    double margin_scale = 0.5;    // lambda_m

    static constexpr double kFloor = 1e-6;

    static PriorTracker uniform(int num_classes, double momentum = 0.999,
                                double margin_scale = 0.5) {
        if (num_classes < 1) throw std::invalid_argument("prior: K >= 1 required");
        PriorTracker t;
        t.prior.assign(static_cast<std::size_t>(num_classes), 1.0 / num_classes);
        t.momentum = momentum;
        t.margin_scale = margin_scale;
        return t;
    }
};

inline std::vector<double> margins(const PriorTracker& tracker) {
    std::vector<double> delta(tracker.prior.size());
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(tracker.prior[i] > 0.0)) throw std::invalid_argument("margins: nonpositive prior entry");
        delta[i] = tracker.margin_scale * std::log(1.0 / tracker.prior[i]);
    }
    return delta;
}

/// p~' = m_p * p~ + (1 - m_p) * mean(batch), floored and renormalized.
/// An empty batch leaves the tracker unchanged.
inline void update_prior(PriorTracker& tracker, const std::vector<std::vector<double>>& prob_batch) {
    if (prob_batch.empty()) return;
    std::size_t k = tracker.prior.size();
    std::vector<double> mean(k, 0.0);
    for (const auto& p : prob_batch) {
        if (p.size() != k) throw std::invalid_argument("update_prior: prob width mismatch");
        for (std::size_t i = 0; i < k; ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(prob_batch.size());
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        tracker.prior[i] = tracker.momentum * tracker.prior[i] + (1.0 - tracker.momentum) * mean[i];
        if (tracker.prior[i] < PriorTracker::kFloor) tracker.prior[i] = PriorTracker::kFloor;
        z += tracker.prior[i];
    }
    for (double& v : tracker.prior) v /= z;
}

inline double total_loss(double loss_s, double loss_u, double lambda_u) {
    return loss_s + lambda_u * loss_u;
}

/// Mean cross-entropy over the labeled batch, as a tape node.
template <class S>
typename Graph<S>::NodeId supervised_loss_node(Graph<S>& g, typename Graph<S>::NodeId logits,
                                               const std::vector<int>& labels) {
    const Tensor<S>& Z = g.value(logits);
    if (labels.empty()) throw std::invalid_argument("supervised_loss: empty batch");
    if (Z.rows() != labels.size()) throw std::invalid_argument("supervised_loss: batch mismatch");
    std::size_t k = Z.cols();
    std::vector<std::vector<S>> targets;
    targets.reserve(labels.size());
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw std::invalid_argument("supervised_loss: label out of range");
        std::vector<S> t(k, S(0));
        t[static_cast<std::size_t>(y)] = S(1);
        targets.push_back(std::move(t));
    }
    std::vector<S> weights(labels.size(), S(1));
    return g.softmax_xent(logits, targets, weights, static_cast<S>(labels.size()));
}

/// Masked consistency loss on strong-view logits, normalized by the full
/// unlabeled batch size. The AdaptiveMargin variant shifts logits by the
/// per-class margins before the cross-entropy; margins are a detached
/// constant. Soft decisions carry their sharpened target through.
template <class S>
typename Graph<S>::NodeId unsupervised_loss_node(Graph<S>& g, typename Graph<S>::NodeId strong_logits,
                                                 const std::vector<PseudoLabelDecision>& decisions,
                                                 LossVariant variant,
                                                 const std::vector<double>& delta,
                                                 std::size_t batch_size) {
    const Tensor<S>& Z = g.value(strong_logits);
    if (Z.rows() != decisions.size())
        throw std::invalid_argument("unsupervised_loss: decision/logit batch mismatch");
    if (batch_size == 0) throw std::invalid_argument("unsupervised_loss: batch size must be positive");
    std::size_t k = Z.cols();
    auto in = strong_logits;
    if (variant == LossVariant::AdaptiveMargin) {
        if (delta.size() != k) throw std::invalid_argument("unsupervised_loss: margin width mismatch");
        in = g.sub_const_row(in, std::vector<S>(delta.begin(), delta.end()));
    }
    std::vector<std::vector<S>> targets;
    std::vector<S> weights;
    targets.reserve(decisions.size());
    weights.reserve(decisions.size());
    for (const auto& d : decisions) {
        std::vector<S> t(k, S(0));
        if (d.accepted) {
            if (!d.soft_target.empty()) {
                if (d.soft_target.size() != k)
                    throw std::invalid_argument("unsupervised_loss: soft target width mismatch");
                for (std::size_t i = 0; i < k; ++i) t[i] = static_cast<S>(d.soft_target[i]);
            } else {
                t[d.hard_label] = S(1);
            }
        }
        targets.push_back(std::move(t));
        weights.push_back(d.accepted ? S(1) : S(0));
    }
    return g.softmax_xent(in, targets, weights, static_cast<S>(batch_size));
}

}  // namespace inpl
