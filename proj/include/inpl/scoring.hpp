#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "inpl/math.hpp"

namespace inpl {

/// Free-energy score of a logit vector: -T * log(sum_i exp(f_i / T)).
/// Lower values mean the sample sits closer to the training distribution.
inline double energy_score(std::span<const double> logits, double temperature = 1.0) {
    return -logsumexp(logits, temperature);
}

struct Confidence {
    std::vector<double> probs;
    double max_prob;
    std::size_t label;  // argmax, ties broken toward the lowest class index
};

inline Confidence softmax_confidence(std::span<const double> logits) {
    Confidence c;
    c.probs = softmax(logits);
    c.label = argmax_lowest_tie(c.probs);
    c.max_prob = c.probs[c.label];
    return c;
}

/// Temperature sharpening: p_i^(1/T) renormalized. Identity at T = 1.
inline std::vector<double> sharpen(std::span<const double> p, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("sharpen: T must be positive");
    std::vector<double> q(p.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] = std::pow(p[i], 1.0 / temperature);
        z += q[i];
    }
    if (!(z > 0.0)) throw std::invalid_argument("sharpen: degenerate distribution");
    for (double& x : q) x /= z;
    return q;
}

/// |log(max softmax) - (energy + max logit)| at T = 1. The identity holds
/// exactly, so the residual is pure floating-point noise.
inline double decoupling_residual(std::span<const double> logits) {
    double max_logit = logits[argmax_lowest_tie(logits)];
    double log_max_prob = std::log(softmax_confidence(logits).max_prob);
    return std::abs(log_max_prob - (energy_score(logits, 1.0) + max_logit));
}

}  // namespace inpl
