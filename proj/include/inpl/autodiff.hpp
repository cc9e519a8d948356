#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "inpl/tensor.hpp"

namespace inpl {

/// Reverse-mode tape over dense tensors. Nodes are appended in forward
/// order; backward() replays the tape in reverse. The op set is exactly
/// what an MLP with softmax cross-entropy heads needs.
template <class S = double>
class Graph {
public:
    using NodeId = std::size_t;

    /// Leaf whose gradient is tracked (parameters, inputs under test).
    NodeId leaf(Tensor<S> v) { return push(std::move(v), true); }

    /// Leaf with no gradient (data, detached targets, margin offsets).
    NodeId constant(Tensor<S> v) { return push(std::move(v), false); }

    const Tensor<S>& value(NodeId id) const { return nodes_[id].value; }
    const Tensor<S>& grad(NodeId id) const { return nodes_[id].grad; }

    /// (n,m) x (m,k) -> (n,k)
    NodeId matmul(NodeId a, NodeId b) {
        const Tensor<S>& A = nodes_[a].value;
        const Tensor<S>& B = nodes_[b].value;
        if (A.cols() != B.rows()) throw std::invalid_argument("matmul: inner dims differ");
        std::size_t n = A.rows(), m = A.cols(), k = B.cols();
        Tensor<S> out = Tensor<S>::zeros({n, k});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                S aij = A.at(i, j);
                for (std::size_t c = 0; c < k; ++c) out.at(i, c) += aij * B.at(j, c);
            }
        NodeId id = push(std::move(out), nodes_[a].track || nodes_[b].track);
        nodes_[id].backward = [this, a, b, id]() {
            const Tensor<S>& G = nodes_[id].grad;
            const Tensor<S>& A2 = nodes_[a].value;
            const Tensor<S>& B2 = nodes_[b].value;
            std::size_t n2 = A2.rows(), m2 = A2.cols(), k2 = B2.cols();
            if (nodes_[a].track) {
                Tensor<S>& GA = nodes_[a].grad;
                for (std::size_t i = 0; i < n2; ++i)
                    for (std::size_t c = 0; c < k2; ++c) {
                        S g = G.at(i, c);
                        for (std::size_t j = 0; j < m2; ++j) GA.at(i, j) += g * B2.at(j, c);
                    }
            }
            if (nodes_[b].track) {
                Tensor<S>& GB = nodes_[b].grad;
                for (std::size_t i = 0; i < n2; ++i)
                    for (std::size_t j = 0; j < m2; ++j) {
                        S a2 = A2.at(i, j);
                        for (std::size_t c = 0; c < k2; ++c) GB.at(j, c) += a2 * G.at(i, c);
                    }
            }
        };
        return id;
    }

    /// Broadcast-add a (1,k) bias row to every row of an (n,k) matrix.
    NodeId add_row(NodeId m, NodeId bias) {
        const Tensor<S>& M = nodes_[m].value;
        const Tensor<S>& B = nodes_[bias].value;
        if (M.cols() != B.size()) throw std::invalid_argument("add_row: width mismatch");
        Tensor<S> out = M;
        for (std::size_t i = 0; i < out.rows(); ++i)
            for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) += B.values[j];
        NodeId id = push(std::move(out), nodes_[m].track || nodes_[bias].track);
        nodes_[id].backward = [this, m, bias, id]() {
            const Tensor<S>& G = nodes_[id].grad;
            if (nodes_[m].track)
                for (std::size_t i = 0; i < G.size(); ++i) nodes_[m].grad.values[i] += G.values[i];
            if (nodes_[bias].track)
                for (std::size_t i = 0; i < G.rows(); ++i)
                    for (std::size_t j = 0; j < G.cols(); ++j)
                        nodes_[bias].grad.values[j] += G.at(i, j);
        };
        return id;
    }

    NodeId relu(NodeId m) {
        Tensor<S> out = nodes_[m].value;
        for (S& v : out.values)
            if (v < S(0)) v = S(0);
        NodeId id = push(std::move(out), nodes_[m].track);
        nodes_[id].backward = [this, m, id]() {
            if (!nodes_[m].track) return;
            const Tensor<S>& G = nodes_[id].grad;
            const Tensor<S>& X = nodes_[m].value;
            for (std::size_t i = 0; i < G.size(); ++i)
                if (X.values[i] > S(0)) nodes_[m].grad.values[i] += G.values[i];
        };
        return id;
    }

    /// Subtract a fixed row (no gradient through the row) from every row.
    NodeId sub_const_row(NodeId m, const std::vector<S>& row) {
        const Tensor<S>& M = nodes_[m].value;
        if (M.cols() != row.size()) throw std::invalid_argument("sub_const_row: width mismatch");
        Tensor<S> out = M;
        for (std::size_t i = 0; i < out.rows(); ++i)
            for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) -= row[j];
        NodeId id = push(std::move(out), nodes_[m].track);
        nodes_[id].backward = [this, m, id]() {
            if (!nodes_[m].track) return;
            const Tensor<S>& G = nodes_[id].grad;
            for (std::size_t i = 0; i < G.size(); ++i) nodes_[m].grad.values[i] += G.values[i];
        };
        return id;
    }

    /// Weighted softmax cross-entropy against per-sample target
    /// distributions, reduced to a scalar:
    ///   (1/divisor) * sum_b w_b * ( logsumexp(z_b) - <target_b, z_b> ).
    /// One-hot targets give the standard hard-label loss.
    NodeId softmax_xent(NodeId logits, const std::vector<std::vector<S>>& targets,
                        const std::vector<S>& weights, S divisor) {
        const Tensor<S>& Z = nodes_[logits].value;
        std::size_t n = Z.rows(), k = Z.cols();
        if (targets.size() != n || weights.size() != n)
            throw std::invalid_argument("softmax_xent: batch size mismatch");
        if (!(divisor > S(0))) throw std::invalid_argument("softmax_xent: divisor must be positive");
        S total = S(0);
        for (std::size_t i = 0; i < n; ++i) {
            if (targets[i].size() != k) throw std::invalid_argument("softmax_xent: target width");
            if (weights[i] == S(0)) continue;
            S m = Z.at(i, 0);
            for (std::size_t j = 1; j < k; ++j) m = std::max(m, Z.at(i, j));
            S acc = S(0);
            for (std::size_t j = 0; j < k; ++j) acc += std::exp(Z.at(i, j) - m);
            S lse = m + std::log(acc);
            S dot = S(0);
            for (std::size_t j = 0; j < k; ++j) dot += targets[i][j] * Z.at(i, j);
            total += weights[i] * (lse - dot);
        }
        NodeId id = push(Tensor<S>({1}, {total / divisor}), nodes_[logits].track);
        nodes_[id].backward = [this, logits, targets, weights, divisor, id]() {
            if (!nodes_[logits].track) return;
            S g = nodes_[id].grad.values[0] / divisor;
            const Tensor<S>& Z2 = nodes_[logits].value;
            Tensor<S>& GZ = nodes_[logits].grad;
            std::size_t n2 = Z2.rows(), k2 = Z2.cols();
            for (std::size_t i = 0; i < n2; ++i) {
                if (weights[i] == S(0)) continue;
                S m = Z2.at(i, 0);
                for (std::size_t j = 1; j < k2; ++j) m = std::max(m, Z2.at(i, j));
                S acc = S(0);
                for (std::size_t j = 0; j < k2; ++j) acc += std::exp(Z2.at(i, j) - m);
                for (std::size_t j = 0; j < k2; ++j) {
                    S p = std::exp(Z2.at(i, j) - m) / acc;
                    GZ.at(i, j) += g * weights[i] * (p - targets[i][j]);
                }
            }
        };
        return id;
    }

    /// scalar + scalar
    NodeId add(NodeId a, NodeId b) {
        require_scalar(a);
        require_scalar(b);
        S v = nodes_[a].value.values[0] + nodes_[b].value.values[0];
        NodeId id = push(Tensor<S>({1}, {v}), nodes_[a].track || nodes_[b].track);
        nodes_[id].backward = [this, a, b, id]() {
            S g = nodes_[id].grad.values[0];
            if (nodes_[a].track) nodes_[a].grad.values[0] += g;
            if (nodes_[b].track) nodes_[b].grad.values[0] += g;
        };
        return id;
    }

    /// scalar * compile-time constant
    NodeId scale(NodeId a, S c) {
        require_scalar(a);
        NodeId id = push(Tensor<S>({1}, {nodes_[a].value.values[0] * c}), nodes_[a].track);
        nodes_[id].backward = [this, a, c, id]() {
            if (nodes_[a].track) nodes_[a].grad.values[0] += c * nodes_[id].grad.values[0];
        };
        return id;
    }

    /// 0.5 * sum of squares, handy as a test loss.
    NodeId half_sum_squares(NodeId a) {
        const Tensor<S>& A = nodes_[a].value;
        S total = S(0);
        for (S v : A.values) total += v * v;
        NodeId id = push(Tensor<S>({1}, {total / S(2)}), nodes_[a].track);
        nodes_[id].backward = [this, a, id]() {
            if (!nodes_[a].track) return;
            S g = nodes_[id].grad.values[0];
            const Tensor<S>& A2 = nodes_[a].value;
            for (std::size_t i = 0; i < A2.size(); ++i) nodes_[a].grad.values[i] += g * A2.values[i];
        };
        return id;
    }

    /// Seeds d(root)/d(root) = 1 and propagates to every tracked leaf.
    void backward(NodeId root) {
        require_scalar(root);
        if (!std::isfinite(static_cast<double>(nodes_[root].value.values[0])))
            throw std::runtime_error("backward: non-finite loss");
        for (auto& n : nodes_) n.grad = Tensor<S>::zeros(n.value.shape);
        nodes_[root].grad.values[0] = S(1);
        for (std::size_t i = nodes_.size(); i-- > 0;)
            if (nodes_[i].backward) nodes_[i].backward();
    }

private:
    struct Node {
        Tensor<S> value;
        Tensor<S> grad;
        bool track = false;
        std::function<void()> backward;
    };

    NodeId push(Tensor<S> v, bool track) {
        Node n;
        n.grad = Tensor<S>::zeros(v.shape);
        n.value = std::move(v);
        n.track = track;
        nodes_.push_back(std::move(n));
        return nodes_.size() - 1;
    }

    void require_scalar(NodeId id) const {
        if (nodes_[id].value.size() != 1) throw std::invalid_argument("expected scalar node");
    }

    std::vector<Node> nodes_;
};

}  // namespace inpl
