#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "inpl/tensor.hpp"

namespace inpl {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::SgdMomentum;
    double learning_rate = 0.03;
    double momentum = 0.9;   // sgd
    double beta1 = 0.9;      // adam
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter accumulators mirroring the parameter shapes.
template <class S = double>
struct OptimizerState {
    OptimizerConfig cfg;
    std::vector<Tensor<S>> m;  // momentum buffer / adam first moment
    std::vector<Tensor<S>> v;  // adam second moment
    long step_count = 0;

    static OptimizerState init(const OptimizerConfig& cfg, const std::vector<Tensor<S>>& params) {
        OptimizerState st;
        st.cfg = cfg;
        for (const auto& p : params) {
            st.m.push_back(Tensor<S>::zeros(p.shape));
            st.v.push_back(Tensor<S>::zeros(p.shape));
        }
        return st;
    }
};

template <class S>
void optimizer_step(OptimizerState<S>& st, std::vector<Tensor<S>>& params,
                    const std::vector<Tensor<S>>& grads) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("optimizer_step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]))
            throw std::invalid_argument("optimizer_step: shape mismatch at parameter " + std::to_string(i));
        if (!grads[i].all_finite()) throw std::runtime_error("optimizer_step: non-finite gradient");
    }
    st.step_count += 1;
    const auto& c = st.cfg;
    if (c.kind == OptimizerKind::SgdMomentum) {
        for (std::size_t i = 0; i < params.size(); ++i)
            for (std::size_t j = 0; j < params[i].size(); ++j) {
                S buf = static_cast<S>(c.momentum) * st.m[i].values[j] + grads[i].values[j];
                st.m[i].values[j] = buf;
                params[i].values[j] -= static_cast<S>(c.learning_rate) * buf;
            }
    } else {
        double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step_count));
        double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step_count));
        for (std::size_t i = 0; i < params.size(); ++i)
            for (std::size_t j = 0; j < params[i].size(); ++j) {
                S g = grads[i].values[j];
                st.m[i].values[j] = static_cast<S>(c.beta1) * st.m[i].values[j] +
                                    static_cast<S>(1.0 - c.beta1) * g;
                st.v[i].values[j] = static_cast<S>(c.beta2) * st.v[i].values[j] +
                                    static_cast<S>(1.0 - c.beta2) * g * g;
                double mhat = static_cast<double>(st.m[i].values[j]) / bc1;
                double vhat = static_cast<double>(st.v[i].values[j]) / bc2;
                params[i].values[j] -=
                    static_cast<S>(c.learning_rate * mhat / (std::sqrt(vhat) + c.eps));
            }
    }
}

/// m * avg + (1 - m) * fresh, elementwise.
template <class S>
Tensor<S> ema_update(const Tensor<S>& avg, const Tensor<S>& fresh, double momentum) {
    if (!avg.same_shape(fresh)) throw std::invalid_argument("ema_update: shape mismatch");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw std::invalid_argument("ema_update: momentum must be in [0,1)");
    Tensor<S> out = avg;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = static_cast<S>(momentum) * avg.values[i] +
                        static_cast<S>(1.0 - momentum) * fresh.values[i];
    return out;
}

template <class S>
void ema_update_inplace(std::vector<Tensor<S>>& avg, const std::vector<Tensor<S>>& fresh,
                        double momentum) {
    if (avg.size() != fresh.size()) throw std::invalid_argument("ema_update: parameter count mismatch");
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = ema_update(avg[i], fresh[i], momentum);
}

}  // namespace inpl
