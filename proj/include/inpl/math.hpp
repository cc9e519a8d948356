#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace inpl {

/// Temperature-scaled log-sum-exp: T * log(sum_i exp(v_i / T)).
/// Max-subtraction keeps it overflow-free for arbitrarily large logits.
inline double logsumexp(std::span<const double> v, double temperature = 1.0) {
    if (v.empty()) throw std::invalid_argument("logsumexp: empty input");
    if (!(temperature > 0.0)) throw std::invalid_argument("logsumexp: T must be positive");
    double m = *std::max_element(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) acc += std::exp((x - m) / temperature);
    return m + temperature * std::log(acc);
}

/// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

inline std::size_t argmax_lowest_tie(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace inpl
