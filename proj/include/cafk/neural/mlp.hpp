#pragma once

// Dense multi-layer perceptron with ReLU hidden layers and a linear output,
// plus the manual reverse pass used by the trainers.
//
// Activations are column-major batches: one sample per column.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "cafk/errors.hpp"

namespace cafk::nn {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// W * X evaluated one column at a time through fixed buffers. Every column
/// runs the same kernel on the same addresses, so its result does not depend
/// on where it sits in X. Blocked GEMM handles edge columns with different
/// kernels, which breaks bitwise permutation invariance over cables.
template <class S, class DW, class DX>
Matrix<S> columnwise_product(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DX>& x) {
    Matrix<S> y(w.rows(), x.cols());
    Vector<S> in(x.rows()), out(w.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        in = x.col(j);
        out.noalias() = w * in;
        y.col(j) = out;
    }
    return y;
}

template <class S>
struct Linear {
    Matrix<S> weight;  // out x in
    Vector<S> bias;    // out

    Eigen::Index in_dim() const { return weight.cols(); }
    Eigen::Index out_dim() const { return weight.rows(); }
};

/// Cached values of one forward pass, needed by `Mlp::backward`.
template <class S>
struct MlpTape {
    std::vector<Matrix<S>> preacts;  // z_k for each layer
    std::vector<Matrix<S>> inputs;   // a_{k-1} for each layer (inputs[0] only set by forward())
};

template <class S>
class Mlp {
public:
    Mlp() = default;

    /// Layer widths `dims = {in, h1, ..., out}`; parameters zero-initialized.
    explicit Mlp(const std::vector<int>& dims) {
        if (dims.size() < 2) throw ShapeMismatch("mlp: need at least input and output width");
        for (int d : dims)
            if (d < 1) throw ShapeMismatch("mlp: layer widths must be positive");
        for (std::size_t k = 0; k + 1 < dims.size(); ++k)
            layers_.push_back({Matrix<S>::Zero(dims[k + 1], dims[k]), Vector<S>::Zero(dims[k + 1])});
    }

    /// Kaiming-uniform weights (bound sqrt(6 / fan_in)), biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    template <class Rng>
    void init(Rng& rng) {
        for (auto& layer : layers_) {
            const double fan_in = static_cast<double>(layer.in_dim());
            std::uniform_real_distribution<double> w(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
            std::uniform_real_distribution<double> b(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = static_cast<S>(w(rng));
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = static_cast<S>(b(rng));
        }
    }

    std::vector<Linear<S>>& layers() { return layers_; }
    const std::vector<Linear<S>>& layers() const { return layers_; }
    Eigen::Index in_dim() const { return layers_.front().in_dim(); }
    Eigen::Index out_dim() const { return layers_.back().out_dim(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    bool same_shape(const Mlp& other) const {
        if (layers_.size() != other.layers_.size()) return false;
        for (std::size_t k = 0; k < layers_.size(); ++k)
            if (layers_[k].weight.rows() != other.layers_[k].weight.rows() ||
                layers_[k].weight.cols() != other.layers_[k].weight.cols())
                return false;
        return true;
    }

    /// First-layer pre-activation W1 x + b1.
    Matrix<S> first_preact(const Matrix<S>& x) const {
        if (x.rows() != in_dim())
            throw ShapeMismatch("mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(in_dim()));
        return columnwise_product<S>(layers_.front().weight, x).colwise() + layers_.front().bias;
    }

    Matrix<S> forward(const Matrix<S>& x, MlpTape<S>* tape = nullptr) const {
        Matrix<S> z = first_preact(x);
        if (tape) {
            tape->inputs.assign(layers_.size(), Matrix<S>());
            tape->inputs[0] = x;
        }
        return forward_from_preact(std::move(z), tape);
    }

    /// Runs the network given the first layer's pre-activation. Lets callers
    /// assemble W1 x from pieces (e.g. concatenated inputs that share columns).
    Matrix<S> forward_from_preact(Matrix<S> z, MlpTape<S>* tape = nullptr) const {
        if (tape) {
            tape->preacts.assign(layers_.size(), Matrix<S>());
            if (tape->inputs.size() != layers_.size()) tape->inputs.resize(layers_.size());
        }
        for (std::size_t k = 0;; ++k) {
            if (tape) tape->preacts[k] = z;
            if (k + 1 == layers_.size()) return z;
            Matrix<S> a = z.cwiseMax(S(0));
            z = columnwise_product<S>(layers_[k + 1].weight, a).colwise() + layers_[k + 1].bias;
            if (tape) tape->inputs[k + 1] = std::move(a);
        }
    }

    /// Accumulates gradients of layers 2..L into `grads` and returns dL/dz_1.
    Matrix<S> backward_to_preact(const MlpTape<S>& tape, Matrix<S> dz, Mlp& grads) const {
        for (std::size_t k = layers_.size() - 1; k > 0; --k) {
            grads.layers_[k].weight.noalias() += dz * tape.inputs[k].transpose();
            grads.layers_[k].bias += dz.rowwise().sum();
            Matrix<S> da = layers_[k].weight.transpose() * dz;
            // ReLU'(z) = 1 for z > 0, else 0 (including z == 0)
            dz = (tape.preacts[k - 1].array() > S(0)).select(da, S(0));
        }
        return dz;
    }

    /// Full reverse pass; accumulates every layer's gradient and returns dL/dx.
    Matrix<S> backward(const MlpTape<S>& tape, const Matrix<S>& dy, Mlp& grads) const {
        Matrix<S> dz = backward_to_preact(tape, dy, grads);
        grads.layers_[0].weight.noalias() += dz * tape.inputs[0].transpose();
        grads.layers_[0].bias += dz.rowwise().sum();
        return layers_[0].weight.transpose() * dz;
    }

    void set_zero() {
        for (auto& l : layers_) {
            l.weight.setZero();
            l.bias.setZero();
        }
    }

    template <class T>
    Mlp<T> cast() const {
        Mlp<T> out;
        for (const auto& l : layers_)
            out.layers().push_back({l.weight.template cast<T>(), l.bias.template cast<T>()});
        return out;
    }

private:
    std::vector<Linear<S>> layers_;
};

}  // namespace cafk::nn
