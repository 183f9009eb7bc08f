#pragma once

// Reference model: a plain MLP over the flattened graph features
// [lengths, anchors, offsets] -> pose. Its input width is tied to the cable
// count it was built for.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cafk/core.hpp"
#include "cafk/neural/cafknet.hpp"
#include "cafk/neural/mlp.hpp"

namespace cafk::nn {

template <class S>
struct MlpBaselineParams {
    Mlp<S> net;
    std::vector<Mlp<S>*> mlps() { return {&net}; }
    std::vector<const Mlp<S>*> mlps() const { return {&net}; }
};

template <class S>
class MlpBaseline {
public:
    using Params = MlpBaselineParams<S>;
    using Tape = MlpTape<S>;
    using Scalar = S;

    MlpBaseline() = default;

    MlpBaseline(std::size_t cable_count, int hidden_layers, int hidden_width, std::uint64_t seed,
                Normalization norm = {})
        : cable_count_(cable_count), norm_(norm) {
        if (cable_count < 1) throw ValidationError("mlp baseline: cable count must be positive");
        std::vector<int> dims{static_cast<int>(7 * cable_count)};
        for (int k = 0; k < hidden_layers; ++k) dims.push_back(hidden_width);
        dims.push_back(6);
        params_.net = Mlp<S>(dims);
        std::mt19937_64 rng(seed);
        params_.net.init(rng);
    }

    MlpBaseline(std::size_t cable_count, Normalization norm, Params params)
        : cable_count_(cable_count), norm_(norm), params_(std::move(params)) {
        if (params_.net.layers().empty() || params_.net.in_dim() != static_cast<Eigen::Index>(7 * cable_count) ||
            params_.net.out_dim() != 6)
            throw ShapeMismatch("mlp baseline: parameter shapes do not match cable count");
    }

    std::size_t cable_count() const { return cable_count_; }
    const Normalization& normalization() const { return norm_; }
    Params& params() { return params_; }
    const Params& params() const { return params_; }

    Params zero_grads() const {
        Params g = params_;
        set_zero(g);
        return g;
    }

    std::size_t head_index(const std::string&) const { return 0; }

    Matrix<S> features(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm) const {
        const auto m = static_cast<Eigen::Index>(config.cable_count());
        if (config.cable_count() != cable_count_ || lengths_mm.rows() != m)
            throw ConfigMismatch("mlp baseline: built for " + std::to_string(cable_count_) + " cables, got config '" +
                                 config.name + "' with " + std::to_string(m));
        Matrix<S> x(7 * m, lengths_mm.cols());
        x.topRows(m) = (lengths_mm / norm_.length_scale).template cast<S>();
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            x.middleRows(m + 3 * i, 3).colwise() = (config.frame_anchors[k] / norm_.length_scale).template cast<S>();
            x.middleRows(4 * m + 3 * i, 3).colwise() = (config.ee_offsets[k] / norm_.length_scale).template cast<S>();
        }
        return x;
    }

    Matrix<S> forward_batch(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm, std::size_t,
                            Tape* tape = nullptr) const {
        return params_.net.forward(features(config, lengths_mm), tape);
    }

    void backward(const Tape& tape, const Matrix<S>& d_out, Params& grads) const {
        params_.net.backward(tape, d_out, grads.net);
    }

    Pose denormalize(const Eigen::Ref<const Matrix<S>>& out, Eigen::Index col) const {
        const auto c = out.col(col).template cast<double>();
        return {c[0] * norm_.length_scale, c[1] * norm_.length_scale, c[2] * norm_.length_scale,
                c[3] * norm_.angle_scale,  c[4] * norm_.angle_scale,  c[5] * norm_.angle_scale};
    }

    std::vector<Pose> predict(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm) const {
        const Matrix<S> out = forward_batch(config, lengths_mm, 0);
        std::vector<Pose> poses;
        for (Eigen::Index k = 0; k < out.cols(); ++k) poses.push_back(denormalize(out, k));
        return poses;
    }

private:
    std::size_t cable_count_ = 0;
    Normalization norm_;
    Params params_;
};

}  // namespace cafk::nn
