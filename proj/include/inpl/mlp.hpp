#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "inpl/autodiff.hpp"
#include "inpl/rng.hpp"
#include "inpl/tensor.hpp"

namespace inpl {

/// Fully-connected classifier with rectifier hidden layers. Parameters are
/// stored flat as [W0, b0, W1, b1, ...] so optimizers can treat them as one
/// list.
template <class S = double>
struct Mlp {
    std::vector<std::size_t> layer_widths;  // input, hidden..., K
    std::vector<Tensor<S>> params;          // weight, bias per layer

    std::size_t input_dim() const { return layer_widths.front(); }
    std::size_t num_classes() const { return layer_widths.back(); }
    std::size_t num_layers() const { return layer_widths.size() - 1; }

    static Mlp init(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t num_classes, Rng& rng) {
        Mlp net;
        net.layer_widths.push_back(input_dim);
        for (auto h : hidden) net.layer_widths.push_back(h);
        net.layer_widths.push_back(num_classes);
        for (std::size_t l = 0; l + 1 < net.layer_widths.size(); ++l) {
            std::size_t fan_in = net.layer_widths[l], fan_out = net.layer_widths[l + 1];
            double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            Tensor<S> w = Tensor<S>::zeros({fan_in, fan_out});
            for (S& v : w.values) v = static_cast<S>(rng.uniform(-bound, bound));
            net.params.push_back(std::move(w));
            net.params.push_back(Tensor<S>::zeros({1, fan_out}));
        }
        return net;
    }

    /// Inference-only forward: batch (n, input_dim) -> logits (n, K).
    Tensor<S> forward(const Tensor<S>& x) const {
        if (x.cols() != input_dim()) throw std::invalid_argument("mlp: input width mismatch");
        Tensor<S> h = x;
        for (std::size_t l = 0; l < num_layers(); ++l) {
            const Tensor<S>& w = params[2 * l];
            const Tensor<S>& b = params[2 * l + 1];
            Tensor<S> out = Tensor<S>::zeros({h.rows(), w.cols()});
            for (std::size_t i = 0; i < h.rows(); ++i)
                for (std::size_t j = 0; j < w.rows(); ++j) {
                    S hij = h.at(i, j);
                    for (std::size_t c = 0; c < w.cols(); ++c) out.at(i, c) += hij * w.at(j, c);
                }
            for (std::size_t i = 0; i < out.rows(); ++i)
                for (std::size_t c = 0; c < out.cols(); ++c) {
                    out.at(i, c) += b.values[c];
                    if (l + 1 < num_layers() && out.at(i, c) < S(0)) out.at(i, c) = S(0);
                }
            h = std::move(out);
        }
        return h;
    }

    std::vector<double> forward_one(const std::vector<double>& x) const {
        Tensor<S> in({1, x.size()}, std::vector<S>(x.begin(), x.end()));
        Tensor<S> out = forward(in);
        return std::vector<double>(out.values.begin(), out.values.end());
    }
};

/// Builds the differentiable forward pass on an existing tape. param_ids
/// must be the leaf ids of this net's parameters, in storage order.
template <class S>
typename Graph<S>::NodeId mlp_forward_graph(Graph<S>& g, const Mlp<S>& net,
                                            const std::vector<typename Graph<S>::NodeId>& param_ids,
                                            typename Graph<S>::NodeId x) {
    if (param_ids.size() != net.params.size())
        throw std::invalid_argument("mlp_forward_graph: param id count mismatch");
    auto h = x;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        h = g.add_row(g.matmul(h, param_ids[2 * l]), param_ids[2 * l + 1]);
        if (l + 1 < net.num_layers()) h = g.relu(h);
    }
    return h;
}

template <class S>
std::vector<typename Graph<S>::NodeId> mlp_param_leaves(Graph<S>& g, const Mlp<S>& net) {
    std::vector<typename Graph<S>::NodeId> ids;
    ids.reserve(net.params.size());
    for (const auto& p : net.params) ids.push_back(g.leaf(p));
    return ids;
}

using Mlpd = Mlp<double>;

}  // namespace inpl
