#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/rng.hpp"

namespace rsg {

// Dense numeric array. Training runs in float, gradient checks in double.
// The autodiff tape works on the 2D (rows x cols) view; images and packed
// weight blocks keep their logical layout in the op plans.
template <typename T>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int64_t rows, int64_t cols) : shape{rows, cols}, data(static_cast<size_t>(rows * cols), T(0)) {}

    static Tensor zeros(int64_t rows, int64_t cols) { return Tensor(rows, cols); }

    static Tensor full(int64_t rows, int64_t cols, T value) {
        Tensor t(rows, cols);
        std::fill(t.data.begin(), t.data.end(), value);
        return t;
    }

    static Tensor randn(int64_t rows, int64_t cols, Rng& rng, double stddev = 1.0) {
        Tensor t(rows, cols);
        for (auto& v : t.data) v = static_cast<T>(rng.normal() * stddev);
        return t;
    }

    int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    int64_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }
    int64_t size() const { return static_cast<int64_t>(data.size()); }

    T& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    const T& at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

    T scalar() const {
        require(data.size() == 1, ErrorKind::ShapeMismatch, "scalar() on non-scalar tensor");
        return data[0];
    }

    bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

inline std::string shape_str(int64_t rows, int64_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename T>
std::string shape_str(const Tensor<T>& t) {
    return shape_str(t.rows(), t.cols());
}

}  // namespace rsg
