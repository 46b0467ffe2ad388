#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rsg/error.hpp"
#include "rsg/tensor.hpp"

namespace rsg {

enum class OpKind : uint8_t {
    kConstant,
    kLeaf,
    kAdd,
    kMul,
    kScale,
    kAddScalar,
    kMatmul,
    kTranspose,
    kGatherRows,
    kScatterRows,
    kScaleRows,
    kConcatCols,
    kSliceCols,
    kPadCols,
    kSumRows,
    kBroadcastRows,
    kSumCols,
    kBroadcastCols,
    kSumAll,
    kBroadcastAll,
    kLeakyRelu,
    kSigmoid,
    kSoftplus,
    kSqrt,
    kReciprocal,
    kReshape,
};

// Eagerly evaluated reverse-mode tape. backward() emits its gradient
// computation as ordinary nodes on the same tape, so gradients are themselves
// differentiable: a second backward() over a function of first-order
// gradients yields exact second-order derivatives (used by the R1 and
// path-length penalties). Nonlinearity backwards are written in terms of
// tape nodes (sigmoid via its output, softplus via sigmoid); only the
// leaky-ReLU mask is a constant, which is exact almost everywhere.
template <typename T>
class Tape {
  public:
    struct Node {
        OpKind op;
        int32_t a = -1;
        int32_t b = -1;
        double c0 = 0.0;   // scalar attribute: scale factor, slope, added constant
        int64_t i0 = 0;    // integer attribute: slice start, scatter rows, reshape rows
        int64_t i1 = 0;    // integer attribute: slice end, reshape cols
        std::shared_ptr<const std::vector<int32_t>> idx;  // gather/scatter row indices
        std::shared_ptr<const std::vector<T>> row_weights;
        Tensor<T> value;
    };

    int64_t size() const { return static_cast<int64_t>(nodes_.size()); }
    const Tensor<T>& value(int32_t id) const { return node(id).value; }
    const Node& node(int32_t id) const {
        require(id >= 0 && id < size(), ErrorKind::Internal, "bad node id");
        return nodes_[id];
    }

    int32_t constant(Tensor<T> v) {
        Node n;
        n.op = OpKind::kConstant;
        n.value = std::move(v);
        return push(std::move(n));
    }

    // A leaf participates in backward(); use for parameters and inputs.
    int32_t leaf(Tensor<T> v) {
        Node n;
        n.op = OpKind::kLeaf;
        n.value = std::move(v);
        return push(std::move(n));
    }

    int32_t add(int32_t a, int32_t b) {
        require(value(a).same_shape(value(b)), ErrorKind::ShapeMismatch,
                "add: " + shape_str(value(a)) + " vs " + shape_str(value(b)));
        Node n = binary(OpKind::kAdd, a, b, value(a));
        T* o = n.value.data.data();
        const T* pb = value(b).data.data();
        for (size_t i = 0; i < n.value.data.size(); ++i) o[i] += pb[i];
        return push(std::move(n));
    }

    int32_t mul(int32_t a, int32_t b) {
        require(value(a).same_shape(value(b)), ErrorKind::ShapeMismatch,
                "mul: " + shape_str(value(a)) + " vs " + shape_str(value(b)));
        Node n = binary(OpKind::kMul, a, b, value(a));
        T* o = n.value.data.data();
        const T* pb = value(b).data.data();
        for (size_t i = 0; i < n.value.data.size(); ++i) o[i] *= pb[i];
        return push(std::move(n));
    }

    int32_t scale(int32_t a, double c) {
        Node n = unary(OpKind::kScale, a, value(a));
        n.c0 = c;
        for (T& x : n.value.data) x = static_cast<T>(x * c);
        return push(std::move(n));
    }

    int32_t add_scalar(int32_t a, double c) {
        Node n = unary(OpKind::kAddScalar, a, value(a));
        n.c0 = c;
        for (T& x : n.value.data) x = static_cast<T>(x + c);
        return push(std::move(n));
    }

    int32_t matmul(int32_t a, int32_t b) {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        require(va.cols() == vb.rows(), ErrorKind::ShapeMismatch,
                "matmul: " + shape_str(va) + " x " + shape_str(vb));
        Node n = binary(OpKind::kMatmul, a, b, Tensor<T>::zeros(va.rows(), vb.cols()));
        const int64_t rows = va.rows(), inner = va.cols(), cols = vb.cols();
        for (int64_t i = 0; i < rows; ++i) {
            const T* ra = &va.data[i * inner];
            T* ro = &n.value.data[i * cols];
            for (int64_t k = 0; k < inner; ++k) {
                T s = ra[k];
                if (s == T(0)) continue;
                const T* rb = &vb.data[k * cols];
                for (int64_t j = 0; j < cols; ++j) ro[j] += s * rb[j];
            }
        }
        return push(std::move(n));
    }

    int32_t transpose(int32_t a) {
        const Tensor<T>& va = value(a);
        Node n = unary(OpKind::kTranspose, a, Tensor<T>(va.cols(), va.rows()));
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(j, i) = va.at(i, j);
        return push(std::move(n));
    }

    // out[i] = a[idx[i]] for idx[i] >= 0, zero row otherwise (padding).
    int32_t gather_rows(int32_t a, std::shared_ptr<const std::vector<int32_t>> idx) {
        const Tensor<T>& va = value(a);
        for (int32_t i : *idx)
            require(i < va.rows(), ErrorKind::ShapeMismatch, "gather_rows: index out of range");
        Node n = unary(OpKind::kGatherRows, a,
                       Tensor<T>::zeros(static_cast<int64_t>(idx->size()), va.cols()));
        n.idx = idx;
        n.i0 = va.rows();
        const int64_t c = va.cols();
        for (size_t i = 0; i < idx->size(); ++i) {
            int32_t src = (*idx)[i];
            if (src < 0) continue;
            for (int64_t j = 0; j < c; ++j) n.value.data[i * c + j] = va.data[src * c + j];
        }
        return push(std::move(n));
    }

    // out[idx[i]] += a[i]; rows with no writers stay zero, idx[i] < 0 rows are dropped.
    int32_t scatter_rows(int32_t a, std::shared_ptr<const std::vector<int32_t>> idx,
                         int64_t out_rows) {
        const Tensor<T>& va = value(a);
        require(static_cast<int64_t>(idx->size()) == va.rows(), ErrorKind::ShapeMismatch,
                "scatter_rows: index count != rows");
        for (int32_t i : *idx)
            require(i < out_rows, ErrorKind::ShapeMismatch, "scatter_rows: index out of range");
        Node n = unary(OpKind::kScatterRows, a, Tensor<T>::zeros(out_rows, va.cols()));
        n.idx = idx;
        n.i0 = out_rows;
        const int64_t c = va.cols();
        for (size_t i = 0; i < idx->size(); ++i) {
            int32_t dst = (*idx)[i];
            if (dst < 0) continue;
            for (int64_t j = 0; j < c; ++j) n.value.data[dst * c + j] += va.data[i * c + j];
        }
        return push(std::move(n));
    }

    // out[i] = a[i] * w[i], constant per-row weights.
    int32_t scale_rows(int32_t a, std::shared_ptr<const std::vector<T>> w) {
        const Tensor<T>& va = value(a);
        require(static_cast<int64_t>(w->size()) == va.rows(), ErrorKind::ShapeMismatch,
                "scale_rows: weight count != rows");
        Node n = unary(OpKind::kScaleRows, a, va);
        n.row_weights = w;
        const int64_t c = va.cols();
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < c; ++j) n.value.data[i * c + j] *= (*w)[i];
        return push(std::move(n));
    }

    int32_t concat_cols(int32_t a, int32_t b) {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        require(va.rows() == vb.rows(), ErrorKind::ShapeMismatch,
                "concat_cols: " + shape_str(va) + " vs " + shape_str(vb));
        Node n = binary(OpKind::kConcatCols, a, b, Tensor<T>(va.rows(), va.cols() + vb.cols()));
        for (int64_t i = 0; i < va.rows(); ++i) {
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(i, j) = va.at(i, j);
            for (int64_t j = 0; j < vb.cols(); ++j) n.value.at(i, va.cols() + j) = vb.at(i, j);
        }
        return push(std::move(n));
    }

    // Columns [c0, c1).
    int32_t slice_cols(int32_t a, int64_t c0, int64_t c1) {
        const Tensor<T>& va = value(a);
        require(c0 >= 0 && c0 <= c1 && c1 <= va.cols(), ErrorKind::ShapeMismatch,
                "slice_cols: bad range");
        Node n = unary(OpKind::kSliceCols, a, Tensor<T>(va.rows(), c1 - c0));
        n.i0 = c0;
        n.i1 = c1;
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = c0; j < c1; ++j) n.value.at(i, j - c0) = va.at(i, j);
        return push(std::move(n));
    }

    // Embed a at column offset `left` inside `total` zero-filled columns.
    int32_t pad_cols(int32_t a, int64_t left, int64_t total) {
        const Tensor<T>& va = value(a);
        require(left >= 0 && left + va.cols() <= total, ErrorKind::ShapeMismatch,
                "pad_cols: bad layout");
        Node n = unary(OpKind::kPadCols, a, Tensor<T>::zeros(va.rows(), total));
        n.i0 = left;
        n.i1 = total;
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(i, left + j) = va.at(i, j);
        return push(std::move(n));
    }

    int32_t sum_rows(int32_t a) {  // N x C -> 1 x C
        const Tensor<T>& va = value(a);
        Node n = unary(OpKind::kSumRows, a, Tensor<T>::zeros(1, va.cols()));
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(0, j) += va.at(i, j);
        return push(std::move(n));
    }

    int32_t broadcast_rows(int32_t a, int64_t rows) {  // 1 x C -> N x C
        const Tensor<T>& va = value(a);
        require(va.rows() == 1, ErrorKind::ShapeMismatch, "broadcast_rows: input must be 1 x C");
        Node n = unary(OpKind::kBroadcastRows, a, Tensor<T>(rows, va.cols()));
        n.i0 = rows;
        for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(i, j) = va.at(0, j);
        return push(std::move(n));
    }

    int32_t sum_cols(int32_t a) {  // N x C -> N x 1
        const Tensor<T>& va = value(a);
        Node n = unary(OpKind::kSumCols, a, Tensor<T>::zeros(va.rows(), 1));
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < va.cols(); ++j) n.value.at(i, 0) += va.at(i, j);
        return push(std::move(n));
    }

    int32_t broadcast_cols(int32_t a, int64_t cols) {  // N x 1 -> N x C
        const Tensor<T>& va = value(a);
        require(va.cols() == 1, ErrorKind::ShapeMismatch, "broadcast_cols: input must be N x 1");
        Node n = unary(OpKind::kBroadcastCols, a, Tensor<T>(va.rows(), cols));
        n.i0 = cols;
        for (int64_t i = 0; i < va.rows(); ++i)
            for (int64_t j = 0; j < cols; ++j) n.value.at(i, j) = va.at(i, 0);
        return push(std::move(n));
    }

    int32_t sum_all(int32_t a) {  // N x C -> 1 x 1
        const Tensor<T>& va = value(a);
        Node n = unary(OpKind::kSumAll, a, Tensor<T>::zeros(1, 1));
        T s = T(0);
        for (T x : va.data) s += x;
        n.value.at(0, 0) = s;
        return push(std::move(n));
    }

    int32_t broadcast_all(int32_t a, int64_t rows, int64_t cols) {  // 1 x 1 -> N x C
        const Tensor<T>& va = value(a);
        require(va.rows() == 1 && va.cols() == 1, ErrorKind::ShapeMismatch,
                "broadcast_all: input must be 1 x 1");
        Node n = unary(OpKind::kBroadcastAll, a, Tensor<T>::full(rows, cols, va.at(0, 0)));
        n.i0 = rows;
        n.i1 = cols;
        return push(std::move(n));
    }

    int32_t leaky_relu(int32_t a, double slope) {
        Node n = unary(OpKind::kLeakyRelu, a, value(a));
        n.c0 = slope;
        for (T& x : n.value.data)
            if (x < T(0)) x = static_cast<T>(x * slope);
        return push(std::move(n));
    }

    int32_t sigmoid(int32_t a) {
        Node n = unary(OpKind::kSigmoid, a, value(a));
        for (T& x : n.value.data) x = T(1) / (T(1) + std::exp(-x));
        return push(std::move(n));
    }

    int32_t softplus(int32_t a) {
        Node n = unary(OpKind::kSoftplus, a, value(a));
        for (T& x : n.value.data)
            x = std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
        return push(std::move(n));
    }

    int32_t sqrt_op(int32_t a) {
        Node n = unary(OpKind::kSqrt, a, value(a));
        for (T& x : n.value.data) {
            require(x >= T(0), ErrorKind::PreconditionViolation, "sqrt of negative value");
            x = std::sqrt(x);
        }
        return push(std::move(n));
    }

    int32_t reciprocal(int32_t a) {
        Node n = unary(OpKind::kReciprocal, a, value(a));
        for (T& x : n.value.data) x = T(1) / x;
        return push(std::move(n));
    }

    int32_t reshape(int32_t a, int64_t rows, int64_t cols) {
        const Tensor<T>& va = value(a);
        require(rows * cols == va.rows() * va.cols(), ErrorKind::ShapeMismatch,
                "reshape: element count mismatch");
        Node n = unary(OpKind::kReshape, a, va);
        n.i0 = rows;
        n.i1 = cols;
        n.value.shape = {rows, cols};
        return push(std::move(n));
    }

    // ---- compositions ----

    int32_t sub(int32_t a, int32_t b) { return add(a, scale(b, -1.0)); }
    int32_t square(int32_t a) { return mul(a, a); }
    int32_t mean_all(int32_t a) {
        const Tensor<T>& va = value(a);
        return scale(sum_all(a), 1.0 / static_cast<double>(va.rows() * va.cols()));
    }
    int32_t tile_cols(int32_t a, int64_t k) {
        require(k >= 1, ErrorKind::ShapeMismatch, "tile_cols: k must be >= 1");
        int32_t out = a;
        for (int64_t i = 1; i < k; ++i) out = concat_cols(out, a);
        return out;
    }
    int32_t dot_all(int32_t a, int32_t b) { return sum_all(mul(a, b)); }

    // Gradients of `loss` w.r.t. every ancestor node, computed by emitting
    // primitive nodes onto this tape. Returns grad node ids indexed by the
    // node ids that existed when backward() was called; -1 where no gradient
    // flows. `seed` overrides the default all-ones upstream gradient.
    std::vector<int32_t> backward(int32_t loss, int32_t seed = -1) {
        require(loss >= 0 && loss < size(), ErrorKind::Internal, "backward: bad loss id");
        std::vector<int32_t> grad(nodes_.size(), -1);
        if (seed < 0)
            seed = constant(Tensor<T>::full(value(loss).rows(), value(loss).cols(), T(1)));
        require(value(seed).same_shape(value(loss)), ErrorKind::ShapeMismatch,
                "backward: seed shape != loss shape");
        grad[loss] = seed;
        for (int32_t id = loss; id >= 0; --id) {
            if (grad[id] < 0) continue;
            emit_backward(id, grad[id], grad);
        }
        return grad;
    }

  private:
    std::vector<Node> nodes_;

    Node unary(OpKind op, int32_t a, Tensor<T> init) {
        Node n;
        n.op = op;
        n.a = a;
        n.value = std::move(init);
        return n;
    }
    Node binary(OpKind op, int32_t a, int32_t b, Tensor<T> init) {
        Node n = unary(op, a, std::move(init));
        n.b = b;
        return n;
    }

    int32_t push(Node n) {
#ifndef NDEBUG
        assert(n.value.all_finite() && "non-finite tensor produced");
#endif
        nodes_.push_back(std::move(n));
        return static_cast<int32_t>(nodes_.size() - 1);
    }

    // The contribution is built lazily so no gradient nodes are emitted for
    // constants (frozen parameters, masks, plan data).
    template <typename MakeContribution>
    void accumulate(std::vector<int32_t>& grad, int32_t target, MakeContribution&& make) {
        if (target < 0) return;
        if (nodes_[target].op == OpKind::kConstant) return;
        int32_t contribution = make();
        grad[target] = grad[target] < 0 ? contribution : add(grad[target], contribution);
    }

    void emit_backward(int32_t id, int32_t g, std::vector<int32_t>& grad) {
        // Copy the trigger fields; nodes_ may reallocate while emitting.
        const OpKind op = nodes_[id].op;
        const int32_t a = nodes_[id].a;
        const int32_t b = nodes_[id].b;
        const double c0 = nodes_[id].c0;
        const int64_t i0 = nodes_[id].i0;
        auto idx = nodes_[id].idx;
        auto row_weights = nodes_[id].row_weights;

        switch (op) {
            case OpKind::kConstant:
            case OpKind::kLeaf:
                break;
            case OpKind::kAdd:
                accumulate(grad, a, [&] { return g; });
                accumulate(grad, b, [&] { return g; });
                break;
            case OpKind::kMul:
                accumulate(grad, a, [&] { return mul(g, b); });
                accumulate(grad, b, [&] { return mul(g, a); });
                break;
            case OpKind::kScale:
                accumulate(grad, a, [&] { return scale(g, c0); });
                break;
            case OpKind::kAddScalar:
                accumulate(grad, a, [&] { return g; });
                break;
            case OpKind::kMatmul:
                accumulate(grad, a, [&] { return matmul(g, transpose(b)); });
                accumulate(grad, b, [&] { return matmul(transpose(a), g); });
                break;
            case OpKind::kTranspose:
                accumulate(grad, a, [&] { return transpose(g); });
                break;
            case OpKind::kGatherRows:
                accumulate(grad, a, [&] { return scatter_rows(g, idx, i0); });
                break;
            case OpKind::kScatterRows:
                accumulate(grad, a, [&] { return gather_rows(g, idx); });
                break;
            case OpKind::kScaleRows:
                accumulate(grad, a, [&] { return scale_rows(g, row_weights); });
                break;
            case OpKind::kConcatCols: {
                int64_t ca = value(a).cols();
                int64_t cb = value(b).cols();
                accumulate(grad, a, [&] { return slice_cols(g, 0, ca); });
                accumulate(grad, b, [&] { return slice_cols(g, ca, ca + cb); });
                break;
            }
            case OpKind::kSliceCols:
                accumulate(grad, a, [&] { return pad_cols(g, i0, value(a).cols()); });
                break;
            case OpKind::kPadCols:
                accumulate(grad, a, [&] { return slice_cols(g, i0, i0 + value(a).cols()); });
                break;
            case OpKind::kSumRows:
                accumulate(grad, a, [&] { return broadcast_rows(g, value(a).rows()); });
                break;
            case OpKind::kBroadcastRows:
                accumulate(grad, a, [&] { return sum_rows(g); });
                break;
            case OpKind::kSumCols:
                accumulate(grad, a, [&] { return broadcast_cols(g, value(a).cols()); });
                break;
            case OpKind::kBroadcastCols:
                accumulate(grad, a, [&] { return sum_cols(g); });
                break;
            case OpKind::kSumAll:
                accumulate(grad, a, [&] { return broadcast_all(g, value(a).rows(), value(a).cols()); });
                break;
            case OpKind::kBroadcastAll:
                accumulate(grad, a, [&] { return sum_all(g); });
                break;
            case OpKind::kLeakyRelu:
                accumulate(grad, a, [&] {
                    Tensor<T> mask = value(a);
                    for (T& x : mask.data) x = x > T(0) ? T(1) : static_cast<T>(c0);
                    return mul(g, constant(std::move(mask)));
                });
                break;
            case OpKind::kSigmoid: {
                // d sigma = y (1 - y), written in terms of the output node so a
                // second backward differentiates it exactly.
                accumulate(grad, a, [&] {
                    int32_t one_minus = add_scalar(scale(id, -1.0), 1.0);
                    return mul(g, mul(id, one_minus));
                });
                break;
            }
            case OpKind::kSoftplus:
                accumulate(grad, a, [&] { return mul(g, sigmoid(a)); });
                break;
            case OpKind::kSqrt:
                accumulate(grad, a, [&] { return scale(mul(g, reciprocal(id)), 0.5); });
                break;
            case OpKind::kReciprocal:
                accumulate(grad, a, [&] { return scale(mul(g, mul(id, id)), -1.0); });
                break;
            case OpKind::kReshape:
                accumulate(grad, a, [&] { return reshape(g, value(a).rows(), value(a).cols()); });
                break;
        }
    }
};

using Tapef = Tape<float>;
using Taped = Tape<double>;

}  // namespace rsg
