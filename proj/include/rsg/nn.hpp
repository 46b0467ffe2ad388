#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/neighborhood.hpp"
#include "rsg/rng.hpp"
#include "rsg/tape.hpp"
#include "rsg/tensor.hpp"

namespace rsg {

// Row indices for the 9-tap gather behind face_conv: per face, tap 0 is the
// face itself, taps 1..8 the canonically ordered neighbors (-1 keeps the
// zero-padding semantics of gather_rows).
inline std::shared_ptr<const std::vector<int32_t>> face_gather_indices(
    const NeighborhoodTable& nbr) {
    auto idx = std::make_shared<std::vector<int32_t>>();
    idx->reserve(nbr.face_count() * 9);
    for (int64_t f = 0; f < nbr.face_count(); ++f) {
        idx->push_back(static_cast<int32_t>(f));
        for (int32_t n : nbr.neighbors[f]) idx->push_back(n);
    }
    return idx;
}

// im2col row indices for a kxk convolution over an H x W image stored as
// (H*W) x C, zero padding via -1.
inline std::shared_ptr<const std::vector<int32_t>> conv2d_gather_indices(int64_t h, int64_t w,
                                                                         int64_t k, int64_t stride,
                                                                         int64_t pad) {
    require(k >= 1 && stride >= 1 && pad >= 0, ErrorKind::PreconditionViolation,
            "conv2d: bad geometry");
    int64_t ho = (h + 2 * pad - k) / stride + 1;
    int64_t wo = (w + 2 * pad - k) / stride + 1;
    require(ho >= 1 && wo >= 1, ErrorKind::ShapeMismatch, "conv2d: output would be empty");
    auto idx = std::make_shared<std::vector<int32_t>>();
    idx->reserve(ho * wo * k * k);
    for (int64_t oy = 0; oy < ho; ++oy)
        for (int64_t ox = 0; ox < wo; ++ox)
            for (int64_t ky = 0; ky < k; ++ky)
                for (int64_t kx = 0; kx < k; ++kx) {
                    int64_t iy = oy * stride - pad + ky;
                    int64_t ix = ox * stride - pad + kx;
                    bool in = iy >= 0 && iy < h && ix >= 0 && ix < w;
                    idx->push_back(in ? static_cast<int32_t>(iy * w + ix) : -1);
                }
    return idx;
}

// out_i = w_0^T x_i + sum_j w_j^T y_j + b. weights is (9*C0) x C1 with rows
// ordered tap-major; bias is 1 x C1 (or -1 for none).
template <typename T>
int32_t face_conv(Tape<T>& tape, int32_t x, const NeighborhoodTable& nbr, int32_t weights,
                  int32_t bias) {
    int64_t f = tape.value(x).rows();
    int64_t c0 = tape.value(x).cols();
    require(f == nbr.face_count(), ErrorKind::ShapeMismatch,
            "face_conv: feature rows != table rows");
    require(tape.value(weights).rows() == 9 * c0, ErrorKind::ShapeMismatch,
            "face_conv: weights must be (9*C0) x C1");
    int32_t x9 = tape.reshape(tape.gather_rows(x, face_gather_indices(nbr)), f, 9 * c0);
    int32_t out = tape.matmul(x9, weights);
    if (bias >= 0) out = tape.add(out, tape.broadcast_rows(bias, f));
    return out;
}

// Style-modulated face_conv. s is 1 x C0 per-input-channel scales; when
// demodulate is set the effective weights are rescaled to unit norm per
// output channel. noise is a per-face (F x 1) tensor scaled by the trainable
// per-channel strength (1 x C1); pass -1 to skip either piece.
template <typename T>
int32_t modulated_face_conv(Tape<T>& tape, int32_t x, const NeighborhoodTable& nbr,
                            int32_t weights, int32_t bias, int32_t s, bool demodulate,
                            int32_t noise = -1, int32_t noise_strength = -1) {
    int64_t f = tape.value(x).rows();
    int64_t c0 = tape.value(x).cols();
    int64_t c1 = tape.value(weights).cols();
    require(f == nbr.face_count(), ErrorKind::ShapeMismatch,
            "modulated_face_conv: feature rows != table rows");
    require(tape.value(weights).rows() == 9 * c0, ErrorKind::ShapeMismatch,
            "modulated_face_conv: weights must be (9*C0) x C1");
    require(tape.value(s).rows() == 1 && tape.value(s).cols() == c0, ErrorKind::ShapeMismatch,
            "modulated_face_conv: style scales must be 1 x C0");

    int32_t s_col = tape.transpose(tape.tile_cols(s, 9));        // (9*C0) x 1
    int32_t w_mod = tape.mul(weights, tape.broadcast_cols(s_col, c1));
    if (demodulate) {
        int32_t norm2 = tape.add_scalar(tape.sum_rows(tape.square(w_mod)), 1e-8);  // 1 x C1
        int32_t inv = tape.reciprocal(tape.sqrt_op(norm2));
        w_mod = tape.mul(w_mod, tape.broadcast_rows(inv, 9 * c0));
    }
    int32_t x9 = tape.reshape(tape.gather_rows(x, face_gather_indices(nbr)), f, 9 * c0);
    int32_t out = tape.matmul(x9, w_mod);
    if (bias >= 0) out = tape.add(out, tape.broadcast_rows(bias, f));
    if (noise >= 0 && noise_strength >= 0) {
        require(tape.value(noise).rows() == f && tape.value(noise).cols() == 1,
                ErrorKind::ShapeMismatch, "modulated_face_conv: noise must be F x 1");
        int32_t n = tape.mul(tape.broadcast_cols(noise, c1),
                             tape.broadcast_rows(noise_strength, f));
        out = tape.add(out, n);
    }
    return out;
}

// x (N x Cin) @ w (Cin x Cout) + b.
template <typename T>
int32_t dense(Tape<T>& tape, int32_t x, int32_t w, int32_t b) {
    int32_t out = tape.matmul(x, w);
    if (b >= 0) out = tape.add(out, tape.broadcast_rows(b, tape.value(x).rows()));
    return out;
}

// Two face_conv + leaky-ReLU(0.2) layers plus a skip; skip is identity when
// w_skip < 0 (requires C0 == C1), otherwise a per-face linear projection.
// Output is (main + skip) / sqrt(2).
template <typename T>
int32_t face_resnet_block(Tape<T>& tape, int32_t x, const NeighborhoodTable& nbr, int32_t w1,
                          int32_t b1, int32_t w2, int32_t b2, int32_t w_skip = -1) {
    int32_t h = tape.leaky_relu(face_conv(tape, x, nbr, w1, b1), 0.2);
    int32_t main = tape.leaky_relu(face_conv(tape, h, nbr, w2, b2), 0.2);
    int32_t skip;
    if (w_skip >= 0) {
        skip = tape.matmul(x, w_skip);
    } else {
        require(tape.value(main).cols() == tape.value(x).cols(), ErrorKind::ShapeMismatch,
                "face_resnet_block: identity skip needs C0 == C1");
        skip = x;
    }
    return tape.scale(tape.add(main, skip), 1.0 / std::sqrt(2.0));
}

// Image stored as (H*W) x Cin row-major; kernel ((k*k*Cin) x Cout) with rows
// ordered (ky, kx, cin). Returns (Ho*Wo) x Cout.
template <typename T>
int32_t conv2d(Tape<T>& tape, int32_t image, int64_t h, int64_t w, int32_t kernel, int32_t bias,
               int64_t k, int64_t stride, int64_t pad) {
    const Tensor<T>& vi = tape.value(image);
    require(vi.rows() == h * w, ErrorKind::ShapeMismatch, "conv2d: image rows != H*W");
    int64_t cin = vi.cols();
    require(tape.value(kernel).rows() == k * k * cin, ErrorKind::ShapeMismatch,
            "conv2d: kernel must be (k*k*Cin) x Cout");
    auto idx = conv2d_gather_indices(h, w, k, stride, pad);
    int64_t out_pixels = static_cast<int64_t>(idx->size()) / (k * k);
    int32_t cols = tape.reshape(tape.gather_rows(image, idx), out_pixels, k * k * cin);
    int32_t out = tape.matmul(cols, kernel);
    if (bias >= 0) out = tape.add(out, tape.broadcast_rows(bias, out_pixels));
    return out;
}

inline int64_t conv2d_out_extent(int64_t extent, int64_t k, int64_t stride, int64_t pad) {
    return (extent + 2 * pad - k) / stride + 1;
}

// ---- initialization ----

// normal(0, 1/sqrt(fan_in)); for every weight layout here fan_in is the row
// count of the matrix (9*C0 for face convs, k*k*Cin for conv2d, Cin for dense).
template <typename T>
Tensor<T> init_weight(Rng& rng, int64_t rows, int64_t cols, int64_t fan_in) {
    Tensor<T> t(rows, cols);
    double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& x : t.data) x = static_cast<T>(rng.normal() * stddev);
    return t;
}

template <typename T>
Tensor<T> init_bias(int64_t cols, double value = 0.0) {
    return Tensor<T>::full(1, cols, static_cast<T>(value));
}

// ---- parameters and Adam ----

template <typename T>
struct ParamStore {
    std::map<std::string, Tensor<T>> tensors;

    Tensor<T>& add(const std::string& name, Tensor<T> t) {
        auto [it, inserted] = tensors.emplace(name, std::move(t));
        require(inserted, ErrorKind::Internal, "duplicate parameter '" + name + "'");
        return it->second;
    }
    Tensor<T>& at(const std::string& name) {
        auto it = tensors.find(name);
        require(it != tensors.end(), ErrorKind::Internal, "unknown parameter '" + name + "'");
        return it->second;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = tensors.find(name);
        require(it != tensors.end(), ErrorKind::Internal, "unknown parameter '" + name + "'");
        return it->second;
    }
    bool has(const std::string& name) const { return tensors.count(name) > 0; }
};

// One Adam update with bias correction; t is the 1-based step index.
template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m, Tensor<T>& v, int64_t t,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    require(param.same_shape(grad), ErrorKind::ShapeMismatch, "adam_step: grad shape mismatch");
    if (m.data.empty()) m = Tensor<T>::zeros(param.rows(), param.cols());
    if (v.data.empty()) v = Tensor<T>::zeros(param.rows(), param.cols());
    require(param.same_shape(m) && param.same_shape(v), ErrorKind::ShapeMismatch,
            "adam_step: state shape mismatch");
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < param.data.size(); ++i) {
        double g = grad.data[i];
        double mi = beta1 * m.data[i] + (1.0 - beta1) * g;
        double vi = beta2 * v.data[i] + (1.0 - beta2) * g * g;
        m.data[i] = static_cast<T>(mi);
        v.data[i] = static_cast<T>(vi);
        double mhat = mi / bc1;
        double vhat = vi / bc2;
        param.data[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
    }
}

// Adam over the named subset of a ParamStore it was given at construction.
template <typename T>
struct Optimizer {
    double lr;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::vector<std::string> names;  // parameters this optimizer owns
    std::map<std::string, Tensor<T>> m;
    std::map<std::string, Tensor<T>> v;

    explicit Optimizer(double lr_ = 1e-3) : lr(lr_) {}

    // Applies one step to every owned parameter that has a gradient; missing
    // gradients (e.g. lazy-regularization steps) leave the tensor untouched
    // but the shared step count still advances.
    void step(ParamStore<T>& params, const std::map<std::string, Tensor<T>>& grads) {
        ++t;
        for (const auto& name : names) {
            auto it = grads.find(name);
            if (it == grads.end()) continue;
            adam_step(params.at(name), it->second, m[name], v[name], t, lr, beta1, beta2, eps);
        }
    }
};

}  // namespace rsg
