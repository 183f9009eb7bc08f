#pragma once

// CafkNet: encoder / message-propagation / decoder GNN for CDPR forward
// kinematics.
//
// Per block, for every cable i:
//   m_wc = gamma_wc(h_w ++ h_c[i] ++ e_wc[i]);   h_c[i] = max(h_c[i], m_wc)
//   m_cb = gamma_cb(h_c[i] ++ h_b ++ e_cb[i])
// and then h_b = max(h_b, m_cb[1], ..., m_cb[m]). Max is elementwise; on ties
// the incumbent value (and, among messages, the lowest slot) is selected,
// which is also where the reverse pass routes the gradient.
//
// Only two message MLPs exist and none of the parameter shapes depend on the
// cable count, so one model runs on any configuration.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cafk/core.hpp"
#include "cafk/graph.hpp"
#include "cafk/neural/mlp.hpp"
#include "cafk/neural/params.hpp"

namespace cafk::nn {

/// Input/output scaling: lengths and positions divided by `length_scale`,
/// angles by `angle_scale`.
struct Normalization {
    double length_scale = 1000.0;
    double angle_scale = kPi;

    friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct CafkNetShape {
    int hidden_dim = 128;    // H: width of every node/edge embedding
    int hidden_layers = 2;   // hidden layers per MLP
    int hidden_width = 128;  // width of those hidden layers
    int depth = 2;           // N: propagation blocks

    void validate() const {
        if (hidden_dim < 1 || hidden_layers < 0 || hidden_width < 1 || depth < 1)
            throw ValidationError("cafknet: invalid shape");
    }
    friend bool operator==(const CafkNetShape&, const CafkNetShape&) = default;
};

template <class S>
struct CafkNetParams {
    Mlp<S> enc_world;  // 3 -> H
    Mlp<S> enc_cable;  // 1 -> H
    Mlp<S> enc_body;   // 6 -> H
    Mlp<S> enc_wc;     // 3 -> H
    Mlp<S> enc_cb;     // 3 -> H
    Mlp<S> gamma_wc;   // 3H -> H
    Mlp<S> gamma_cb;   // 3H -> H
    std::vector<Mlp<S>> heads;  // H -> 6, one per registered configuration

    std::vector<Mlp<S>*> mlps() {
        std::vector<Mlp<S>*> out = {&enc_world, &enc_cable, &enc_body, &enc_wc, &enc_cb, &gamma_wc, &gamma_cb};
        for (auto& h : heads) out.push_back(&h);
        return out;
    }
    std::vector<const Mlp<S>*> mlps() const {
        std::vector<const Mlp<S>*> out = {&enc_world, &enc_cable, &enc_body, &enc_wc, &enc_cb, &gamma_wc, &gamma_cb};
        for (const auto& h : heads) out.push_back(&h);
        return out;
    }
};

/// Normalized inputs for B graphs that share edge features (same robot, same
/// cable order). Cable node columns are laid out sample-major: b * m + i.
template <class S>
struct GraphBatch {
    Matrix<S> world;   // 3 x 1
    Matrix<S> body;    // 6 x 1
    Matrix<S> cables;  // 1 x (B m)
    Matrix<S> edge_wc; // 3 x m
    Matrix<S> edge_cb; // 3 x m
    Eigen::Index batch = 0;
    Eigen::Index cable_count = 0;
};

/// Hidden state of the graph: every node and edge embedding.
template <class S>
struct GraphState {
    Matrix<S> world;   // H x 1
    Matrix<S> cables;  // H x (B m)
    Matrix<S> body;    // H x B
    Matrix<S> edge_wc; // H x m
    Matrix<S> edge_cb; // H x m
    Eigen::Index batch = 0;
    Eigen::Index cable_count = 0;
};

template <class S>
struct BlockTape {
    Matrix<S> cables_in, cables_out, body_in;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> message_won;  // H x (B m)
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> body_argmax;  // H x B, -1 = incumbent
    MlpTape<S> gamma_wc, gamma_cb;
};

template <class S>
struct CafkNetTape {
    MlpTape<S> enc_world, enc_cable, enc_body, enc_wc, enc_cb, head;
    GraphState<S> encoded;
    std::vector<BlockTape<S>> blocks;
    std::size_t head_index = 0;
};

template <class S>
class CafkNet {
public:
    using Params = CafkNetParams<S>;
    using Tape = CafkNetTape<S>;
    using Scalar = S;

    CafkNet() = default;

    /// Fresh model with seeded Kaiming-uniform initialization. `head_names`
    /// registers one decoder per configuration; a single head is shared by
    /// every configuration.
    CafkNet(const CafkNetShape& shape, std::vector<std::string> head_names, std::uint64_t seed,
            Normalization norm = {})
        : shape_(shape), norm_(norm), head_names_(std::move(head_names)) {
        shape_.validate();
        if (head_names_.empty()) throw ValidationError("cafknet: at least one decoder head is required");
        const int h = shape_.hidden_dim;
        auto dims = [&](int in, int out) {
            std::vector<int> d{in};
            for (int k = 0; k < shape_.hidden_layers; ++k) d.push_back(shape_.hidden_width);
            d.push_back(out);
            return d;
        };
        params_.enc_world = Mlp<S>(dims(3, h));
        params_.enc_cable = Mlp<S>(dims(1, h));
        params_.enc_body = Mlp<S>(dims(6, h));
        params_.enc_wc = Mlp<S>(dims(3, h));
        params_.enc_cb = Mlp<S>(dims(3, h));
        params_.gamma_wc = Mlp<S>(dims(3 * h, h));
        params_.gamma_cb = Mlp<S>(dims(3 * h, h));
        for (std::size_t k = 0; k < head_names_.size(); ++k) params_.heads.emplace_back(dims(h, 6));
        std::mt19937_64 rng(seed);
        for (auto* mlp : params_.mlps()) mlp->init(rng);
    }

    /// Rebuilds a model from stored parts (checkpoint loading).
    CafkNet(const CafkNetShape& shape, Normalization norm, std::vector<std::string> head_names, Params params)
        : shape_(shape), norm_(norm), head_names_(std::move(head_names)), params_(std::move(params)) {
        shape_.validate();
        if (head_names_.size() != params_.heads.size() || head_names_.empty())
            throw ValidationError("cafknet: head registry does not match decoder count");
        CafkNet reference(shape_, head_names_, 0, norm_);
        if (!same_shape(reference.params_, params_)) throw ShapeMismatch("cafknet: parameter shapes do not match shape");
    }

    const CafkNetShape& shape() const { return shape_; }
    const Normalization& normalization() const { return norm_; }
    const std::vector<std::string>& head_names() const { return head_names_; }
    Params& params() { return params_; }
    const Params& params() const { return params_; }

    Params zero_grads() const {
        Params g = params_;
        set_zero(g);
        return g;
    }

    /// Decoder for `config_name`; the only head when there is just one.
    std::size_t head_index(const std::string& config_name) const {
        if (head_names_.size() == 1) return 0;
        for (std::size_t k = 0; k < head_names_.size(); ++k)
            if (head_names_[k] == config_name) return k;
        throw ConfigMismatch("cafknet: no decoder head registered for config '" + config_name + "'");
    }

    // -- batch assembly ----------------------------------------------------

    GraphBatch<S> batch_from_config(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm) const {
        const auto m = static_cast<Eigen::Index>(config.cable_count());
        if (lengths_mm.rows() != m)
            throw ConfigMismatch("cafknet: lengths have " + std::to_string(lengths_mm.rows()) +
                                 " rows, config '" + config.name + "' has " + std::to_string(m) + " cables");
        GraphBatch<S> g;
        g.batch = lengths_mm.cols();
        g.cable_count = m;
        g.world = Matrix<S>::Zero(3, 1);
        g.body = Matrix<S>::Zero(6, 1);
        g.cables = (lengths_mm.reshaped(1, m * g.batch) / norm_.length_scale).template cast<S>();
        g.edge_wc.resize(3, m);
        g.edge_cb.resize(3, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            g.edge_wc.col(i) = (config.frame_anchors[static_cast<std::size_t>(i)] / norm_.length_scale).template cast<S>();
            g.edge_cb.col(i) = (config.ee_offsets[static_cast<std::size_t>(i)] / norm_.length_scale).template cast<S>();
        }
        return g;
    }

    GraphBatch<S> batch_from_graph(const CdprGraph& graph) const {
        const auto m = static_cast<Eigen::Index>(graph.cable_count());
        if (m < 1 || graph.edge_wc_features.size() != graph.cable_count() ||
            graph.edge_cb_features.size() != graph.cable_count())
            throw ShapeMismatch("cafknet: malformed graph");
        GraphBatch<S> g;
        g.batch = 1;
        g.cable_count = m;
        g.world = (graph.world_feature / norm_.length_scale).template cast<S>();
        Vec6 body = graph.body_feature;
        body.head<3>() /= norm_.length_scale;
        body.tail<3>() /= norm_.angle_scale;
        g.body = body.template cast<S>();
        g.cables.resize(1, m);
        g.edge_wc.resize(3, m);
        g.edge_cb.resize(3, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            g.cables(0, i) = static_cast<S>(graph.cable_features[k] / norm_.length_scale);
            g.edge_wc.col(i) = (graph.edge_wc_features[k] / norm_.length_scale).template cast<S>();
            g.edge_cb.col(i) = (graph.edge_cb_features[k] / norm_.length_scale).template cast<S>();
        }
        return g;
    }

    // -- forward -----------------------------------------------------------

    /// Maps every node and edge feature through its role's encoder.
    GraphState<S> encode(const GraphBatch<S>& g, Tape* tape = nullptr) const {
        GraphState<S> s;
        s.batch = g.batch;
        s.cable_count = g.cable_count;
        s.world = params_.enc_world.forward(g.world, tape ? &tape->enc_world : nullptr);
        s.cables = params_.enc_cable.forward(g.cables, tape ? &tape->enc_cable : nullptr);
        const Matrix<S> body0 = params_.enc_body.forward(g.body, tape ? &tape->enc_body : nullptr);
        s.body = body0.replicate(1, g.batch);
        s.edge_wc = params_.enc_wc.forward(g.edge_wc, tape ? &tape->enc_wc : nullptr);
        s.edge_cb = params_.enc_cb.forward(g.edge_cb, tape ? &tape->enc_cb : nullptr);
        return s;
    }

    /// One message-propagation block (world -> cables, then cables -> body).
    GraphState<S> propagate_block(GraphState<S> s, BlockTape<S>* tape = nullptr) const {
        const Eigen::Index h = shape_.hidden_dim;
        const Eigen::Index m = s.cable_count;
        const Eigen::Index b = s.batch;

        // world -> cable messages
        {
            const auto& w = params_.gamma_wc.layers().front().weight;
            const auto& bias = params_.gamma_wc.layers().front().bias;
            // constant part shared by all samples: W_w h_w + W_e e_wc + b
            const Vector<S> shared = w.leftCols(h) * s.world.col(0) + bias;
            const Matrix<S> per_cable = columnwise_product<S>(w.rightCols(h), s.edge_wc).colwise() + shared;
            Matrix<S> z = columnwise_product<S>(w.middleCols(h, h), s.cables);
            for (Eigen::Index k = 0; k < b; ++k) z.middleCols(k * m, m) += per_cable;
            const Matrix<S> msg = params_.gamma_wc.forward_from_preact(std::move(z), tape ? &tape->gamma_wc : nullptr);
            if (tape) {
                tape->cables_in = s.cables;
                tape->message_won = msg.array() > s.cables.array();
            }
            s.cables = s.cables.cwiseMax(msg);
        }

        // cable -> body messages
        {
            const auto& w = params_.gamma_cb.layers().front().weight;
            const auto& bias = params_.gamma_cb.layers().front().bias;
            const Matrix<S> per_cable = columnwise_product<S>(w.rightCols(h), s.edge_cb).colwise() + bias;
            const Matrix<S> per_sample = w.middleCols(h, h) * s.body;
            Matrix<S> z = columnwise_product<S>(w.leftCols(h), s.cables);
            for (Eigen::Index k = 0; k < b; ++k) {
                z.middleCols(k * m, m) += per_cable;
                z.middleCols(k * m, m).colwise() += per_sample.col(k);
            }
            const Matrix<S> msg = params_.gamma_cb.forward_from_preact(std::move(z), tape ? &tape->gamma_cb : nullptr);

            Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax(h, b);
            Matrix<S> body = s.body;
            for (Eigen::Index k = 0; k < b; ++k)
                for (Eigen::Index r = 0; r < h; ++r) {
                    S best = body(r, k);
                    int arg = -1;
                    for (Eigen::Index i = 0; i < m; ++i) {
                        const S v = msg(r, k * m + i);
                        if (v > best) {
                            best = v;
                            arg = static_cast<int>(i);
                        }
                    }
                    body(r, k) = best;
                    argmax(r, k) = arg;
                }
            if (tape) {
                tape->cables_out = s.cables;
                tape->body_in = s.body;
                tape->body_argmax = std::move(argmax);
            }
            s.body = std::move(body);
        }
        return s;
    }

    /// Normalized pose prediction (6 x B) from the final body embeddings.
    Matrix<S> decode(const GraphState<S>& s, std::size_t head, Tape* tape = nullptr) const {
        if (head >= params_.heads.size()) throw IndexOutOfRange("cafknet: decoder head out of range");
        return params_.heads[head].forward(s.body, tape ? &tape->head : nullptr);
    }

    Matrix<S> forward(const GraphBatch<S>& g, std::size_t head, Tape* tape = nullptr) const {
        GraphState<S> s = encode(g, tape);
        if (tape) {
            tape->encoded = s;
            tape->blocks.assign(static_cast<std::size_t>(shape_.depth), BlockTape<S>());
            tape->head_index = head;
        }
        for (int k = 0; k < shape_.depth; ++k)
            s = propagate_block(std::move(s), tape ? &tape->blocks[static_cast<std::size_t>(k)] : nullptr);
        return decode(s, head, tape);
    }

    /// Trainer entry point: lengths are m x B in mm, output is normalized.
    Matrix<S> forward_batch(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm, std::size_t head,
                            Tape* tape = nullptr) const {
        return forward(batch_from_config(config, lengths_mm), head, tape);
    }

    Pose denormalize(const Eigen::Ref<const Matrix<S>>& out, Eigen::Index col) const {
        const auto c = out.col(col).template cast<double>();
        return {c[0] * norm_.length_scale, c[1] * norm_.length_scale, c[2] * norm_.length_scale,
                c[3] * norm_.angle_scale,  c[4] * norm_.angle_scale,  c[5] * norm_.angle_scale};
    }

    /// FK prediction for one graph.
    Pose predict(const CdprGraph& graph) const {
        const Matrix<S> out = forward(batch_from_graph(graph), head_index(graph.config_name));
        return denormalize(out, 0);
    }

    std::vector<Pose> predict(const CdprConfig& config, const Eigen::MatrixXd& lengths_mm) const {
        const Matrix<S> out = forward_batch(config, lengths_mm, head_index(config.name));
        std::vector<Pose> poses;
        poses.reserve(static_cast<std::size_t>(out.cols()));
        for (Eigen::Index k = 0; k < out.cols(); ++k) poses.push_back(denormalize(out, k));
        return poses;
    }

    // -- reverse pass ------------------------------------------------------

    /// Accumulates dLoss/dParams into `grads` given dLoss/dOutput (6 x B, normalized).
    void backward(const Tape& tape, const Matrix<S>& d_out, Params& grads) const {
        const Eigen::Index h = shape_.hidden_dim;
        const Eigen::Index m = tape.encoded.cable_count;
        const Eigen::Index b = tape.encoded.batch;
        const GraphState<S>& enc = tape.encoded;

        Matrix<S> d_body = params_.heads[tape.head_index].backward(tape.head, d_out, grads.heads[tape.head_index]);
        Matrix<S> d_cables = Matrix<S>::Zero(h, m * b);
        Matrix<S> d_world = Matrix<S>::Zero(h, 1);
        Matrix<S> d_edge_wc = Matrix<S>::Zero(h, m);
        Matrix<S> d_edge_cb = Matrix<S>::Zero(h, m);

        auto sum_over_samples = [&](const Matrix<S>& x) {  // (. x Bm) -> (. x m)
            Matrix<S> out = Matrix<S>::Zero(x.rows(), m);
            for (Eigen::Index k = 0; k < b; ++k) out += x.middleCols(k * m, m);
            return out;
        };
        auto sum_over_cables = [&](const Matrix<S>& x) {  // (. x Bm) -> (. x B)
            Matrix<S> out(x.rows(), b);
            for (Eigen::Index k = 0; k < b; ++k) out.col(k) = x.middleCols(k * m, m).rowwise().sum();
            return out;
        };

        for (int blk = shape_.depth - 1; blk >= 0; --blk) {
            const BlockTape<S>& bt = tape.blocks[static_cast<std::size_t>(blk)];

            // body max aggregation
            Matrix<S> d_body_in = Matrix<S>::Zero(h, b);
            Matrix<S> d_msg_cb = Matrix<S>::Zero(h, m * b);
            for (Eigen::Index k = 0; k < b; ++k)
                for (Eigen::Index r = 0; r < h; ++r) {
                    const int a = bt.body_argmax(r, k);
                    if (a < 0)
                        d_body_in(r, k) = d_body(r, k);
                    else
                        d_msg_cb(r, k * m + a) = d_body(r, k);
                }

            {
                const auto& w = params_.gamma_cb.layers().front().weight;
                auto& gl = grads.gamma_cb.layers().front();
                const Matrix<S> dz = params_.gamma_cb.backward_to_preact(bt.gamma_cb, d_msg_cb, grads.gamma_cb);
                const Matrix<S> dz_sample = sum_over_cables(dz);
                const Matrix<S> dz_cable = sum_over_samples(dz);
                gl.weight.leftCols(h).noalias() += dz * bt.cables_out.transpose();
                gl.weight.middleCols(h, h).noalias() += dz_sample * bt.body_in.transpose();
                gl.weight.rightCols(h).noalias() += dz_cable * enc.edge_cb.transpose();
                gl.bias += dz.rowwise().sum();
                d_cables.noalias() += w.leftCols(h).transpose() * dz;
                d_body_in.noalias() += w.middleCols(h, h).transpose() * dz_sample;
                d_edge_cb.noalias() += w.rightCols(h).transpose() * dz_cable;
            }

            // cable max update
            const Matrix<S> d_msg_wc = bt.message_won.select(d_cables, S(0));
            Matrix<S> d_cables_in = bt.message_won.select(S(0), d_cables);
            {
                const auto& w = params_.gamma_wc.layers().front().weight;
                auto& gl = grads.gamma_wc.layers().front();
                const Matrix<S> dz = params_.gamma_wc.backward_to_preact(bt.gamma_wc, d_msg_wc, grads.gamma_wc);
                const Matrix<S> dz_cable = sum_over_samples(dz);
                const Matrix<S> dz_total = dz.rowwise().sum();
                gl.weight.leftCols(h).noalias() += dz_total * enc.world.transpose();
                gl.weight.middleCols(h, h).noalias() += dz * bt.cables_in.transpose();
                gl.weight.rightCols(h).noalias() += dz_cable * enc.edge_wc.transpose();
                gl.bias += dz_total;
                d_cables_in.noalias() += w.middleCols(h, h).transpose() * dz;
                d_world.noalias() += w.leftCols(h).transpose() * dz_total;
                d_edge_wc.noalias() += w.rightCols(h).transpose() * dz_cable;
            }
            d_cables = std::move(d_cables_in);
            d_body = std::move(d_body_in);
        }

        params_.enc_cable.backward(tape.enc_cable, d_cables, grads.enc_cable);
        params_.enc_body.backward(tape.enc_body, d_body.rowwise().sum(), grads.enc_body);
        params_.enc_world.backward(tape.enc_world, d_world, grads.enc_world);
        params_.enc_wc.backward(tape.enc_wc, d_edge_wc, grads.enc_wc);
        params_.enc_cb.backward(tape.enc_cb, d_edge_cb, grads.enc_cb);
    }

    template <class T>
    CafkNet<T> cast() const {
        typename CafkNet<T>::Params p;
        auto src = params_.mlps();
        p.heads.resize(params_.heads.size());
        auto dst = p.mlps();
        for (std::size_t k = 0; k < src.size(); ++k) *dst[k] = src[k]->template cast<T>();
        return CafkNet<T>(shape_, norm_, head_names_, std::move(p));
    }

private:
    CafkNetShape shape_;
    Normalization norm_;
    std::vector<std::string> head_names_;
    Params params_;
};

}  // namespace cafk::nn
