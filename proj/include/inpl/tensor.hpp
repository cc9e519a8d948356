#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace inpl {

/// Dense row-major tensor. Rank 1 or 2 is all the classifier needs.
template <class S = double>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<S> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> sh, std::vector<S> vals)
        : shape(std::move(sh)), values(std::move(vals)) {
        if (count(shape) != values.size())
            throw std::invalid_argument("tensor: shape/value size mismatch");
    }

    static std::size_t count(const std::vector<std::size_t>& sh) {
        std::size_t n = 1;
        for (auto d : sh) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> sh) {
        std::size_t n = count(sh);
        return Tensor(std::move(sh), std::vector<S>(n, S(0)));
    }

    std::size_t size() const { return values.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    S& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    const S& at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (S v : values)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using Tensord = Tensor<double>;
using Tensorf = Tensor<float>;

}  // namespace inpl
