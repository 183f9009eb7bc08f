#pragma once

// Training harness, position-only evaluation and the experiment protocols:
// one2one, multi-task, zero-shot transfer, sim2real and FK timing.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cafk/core.hpp"
#include "cafk/data.hpp"
#include "cafk/fk_opt.hpp"
#include "cafk/graph.hpp"
#include "cafk/neural/adam.hpp"
#include "cafk/neural/cafknet.hpp"
#include "cafk/neural/mlp_baseline.hpp"
#include "cafk/neural/params.hpp"

namespace cafk::exp {

struct TrainSpec {
    int epochs = 300;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double lr_decay_factor = 0.5;  // applied when the epoch loss plateaus
    int lr_patience = 20;          // epochs without improvement before decaying
    double min_learning_rate = 1e-6;
    std::uint64_t seed = 0;
    bool position_only = true;  // loss mask: ignore orientation outputs

    void validate() const {
        if (epochs < 0) throw ValidationError("train: epochs must be >= 0");
        if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
        if (!(learning_rate > 0)) throw ValidationError("train: learning rate must be positive");
        if (!(lr_decay_factor > 0 && lr_decay_factor <= 1)) throw ValidationError("train: decay factor must be in (0, 1]");
        if (lr_patience < 0) throw ValidationError("train: patience must be >= 0");
    }
};

struct EpochStat {
    int epoch = 0;
    double loss = 0;           // mean squared normalized error of the masked outputs
    double position_rmse = 0;  // training RMSE in mm (position only)
    double learning_rate = 0;
};

struct TrainResult {
    std::vector<EpochStat> curve;
};

/// One training source: a dataset and the configuration it was recorded on.
struct TrainSet {
    const CdprConfig* config;
    const data::Dataset* dataset;
};

/// Root mean square Euclidean position error (mm); orientation is ignored.
inline double rmse_position(const std::vector<Pose>& predictions, const std::vector<Pose>& references) {
    if (predictions.empty()) throw EmptyInput("rmse_position: no samples");
    if (predictions.size() != references.size()) throw ShapeMismatch("rmse_position: size mismatch");
    double sum = 0;
    for (std::size_t k = 0; k < predictions.size(); ++k)
        sum += (predictions[k].position() - references[k].position()).squaredNorm();
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

namespace detail {

template <class S>
nn::Matrix<S> normalized_targets(const data::Dataset& ds, const nn::Normalization& norm) {
    nn::Matrix<S> t(6, static_cast<Eigen::Index>(ds.size()));
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const Pose& p = ds.samples[k].pose;
        t.col(static_cast<Eigen::Index>(k)) << static_cast<S>(p.x / norm.length_scale),
            static_cast<S>(p.y / norm.length_scale), static_cast<S>(p.z / norm.length_scale),
            static_cast<S>(p.roll / norm.angle_scale), static_cast<S>(p.pitch / norm.angle_scale),
            static_cast<S>(p.yaw / norm.angle_scale);
    }
    return t;
}

}  // namespace detail

/// Minibatch Adam on the mean squared (position) error. Works for any model
/// exposing forward_batch / backward / params / head_index (CafkNet, MlpBaseline).
/// Samples from all sets are shuffled together; inside a batch, samples are
/// grouped per set and their gradients summed in set order.
template <class Model>
TrainResult train(Model& model, const std::vector<TrainSet>& sets, const TrainSpec& spec) {
    using S = typename Model::Scalar;
    spec.validate();
    if (sets.empty()) throw EmptyInput("train: no datasets");

    struct Prepared {
        const CdprConfig* config;
        std::size_t head;
        Eigen::MatrixXd lengths;
        nn::Matrix<S> targets;
    };
    std::vector<Prepared> prep;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> refs;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        data::check_matches(*sets[s].config, *sets[s].dataset);
        prep.push_back({sets[s].config, model.head_index(sets[s].config->name), sets[s].dataset->lengths_matrix(),
                        detail::normalized_targets<S>(*sets[s].dataset, model.normalization())});
        for (std::size_t k = 0; k < sets[s].dataset->size(); ++k)
            refs.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k));
    }
    if (refs.empty()) throw EmptyInput("train: datasets are empty");

    TrainResult result;
    if (spec.epochs == 0) return result;

    nn::AdamState<S> adam(model.params(), {spec.learning_rate});
    auto grads = model.zero_grads();
    std::mt19937_64 rng(spec.seed);
    const double scale = model.normalization().length_scale;
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        std::shuffle(refs.begin(), refs.end(), rng);
        double epoch_sum = 0, pos_sum = 0;

        for (std::size_t start = 0; start < refs.size(); start += static_cast<std::size_t>(spec.batch_size)) {
            const std::size_t end = std::min(refs.size(), start + static_cast<std::size_t>(spec.batch_size));
            const auto bsize = static_cast<S>(end - start);
            set_zero(grads);
            double batch_sum = 0;

            std::vector<std::vector<std::uint32_t>> groups(prep.size());
            for (std::size_t r = start; r < end; ++r) groups[refs[r].first].push_back(refs[r].second);
            for (std::size_t s = 0; s < prep.size(); ++s) {
                if (groups[s].empty()) continue;
                const auto& p = prep[s];
                const auto n = static_cast<Eigen::Index>(groups[s].size());
                Eigen::MatrixXd lengths(p.lengths.rows(), n);
                nn::Matrix<S> target(6, n);
                for (Eigen::Index c = 0; c < n; ++c) {
                    lengths.col(c) = p.lengths.col(groups[s][static_cast<std::size_t>(c)]);
                    target.col(c) = p.targets.col(groups[s][static_cast<std::size_t>(c)]);
                }
                typename Model::Tape tape;
                const nn::Matrix<S> out = model.forward_batch(*p.config, lengths, p.head, &tape);
                nn::Matrix<S> diff = out - target;
                if (spec.position_only) diff.bottomRows(3).setZero();
                batch_sum += static_cast<double>(diff.squaredNorm());
                pos_sum += static_cast<double>(diff.topRows(3).squaredNorm());
                model.backward(tape, (S(2) / bsize) * diff, grads);
            }
            if (!std::isfinite(batch_sum))
                throw DivergenceDetected("train: non-finite loss at epoch " + std::to_string(epoch));
            nn::adam_step(adam, model.params(), grads);
            epoch_sum += batch_sum;
        }

        const double loss = epoch_sum / static_cast<double>(refs.size());
        result.curve.push_back({epoch, loss,
                                std::sqrt(pos_sum / static_cast<double>(refs.size())) * scale,
                                adam.hyper.learning_rate});
        if (loss < best * (1 - 1e-4)) {
            best = loss;
            stale = 0;
        } else if (++stale > spec.lr_patience) {
            const double lr = adam.hyper.learning_rate;
            adam.hyper.learning_rate = std::min(lr, std::max(spec.min_learning_rate, lr * spec.lr_decay_factor));
            stale = 0;
        }
    }
    return result;
}

template <class Model>
TrainResult train(Model& model, const CdprConfig& config, const data::Dataset& ds, const TrainSpec& spec) {
    return train(model, std::vector<TrainSet>{{&config, &ds}}, spec);
}

/// Predictions for every sample of `ds`, computed in chunks.
template <class Model>
std::vector<Pose> predict(const Model& model, const CdprConfig& config, const data::Dataset& ds,
                          std::size_t chunk = 512) {
    data::check_matches(config, ds);
    const Eigen::MatrixXd lengths = ds.lengths_matrix();
    std::vector<Pose> out;
    out.reserve(ds.size());
    for (Eigen::Index start = 0; start < lengths.cols(); start += static_cast<Eigen::Index>(chunk)) {
        const Eigen::Index n = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), lengths.cols() - start);
        auto part = model.predict(config, lengths.middleCols(start, n));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

template <class Model>
double evaluate_rmse(const Model& model, const CdprConfig& config, const data::Dataset& ds) {
    return rmse_position(predict(model, config, ds), ds.poses());
}

// ---------------------------------------------------------------------------
// reports

struct EvalEntry {
    std::string config;
    double rmse_mm = 0;
    std::size_t samples = 0;
    double seconds_per_trajectory = 0;  // 0 when not measured
};

struct EvalReport {
    std::string protocol;
    std::vector<EvalEntry> entries;
};

template <class Model>
EvalEntry evaluate(const Model& model, const CdprConfig& config, const data::Dataset& ds) {
    return {config.name, evaluate_rmse(model, config, ds), ds.size(), 0.0};
}

// ---------------------------------------------------------------------------
// transfer

/// Zero-shot evaluation of `model` on `target` data. The model is taken by
/// const reference and its parameter hash is checked before and after.
template <class Model>
EvalReport run_transfer(const Model& model, const std::vector<std::string>& source_configs, const CdprConfig& target,
                        const data::Dataset& target_data) {
    if (source_configs.size() > 1 &&
        std::find(source_configs.begin(), source_configs.end(), target.name) != source_configs.end())
        throw ValidationError("run_transfer: multi-config sources must exclude the target '" + target.name + "'");
    const auto before = nn::parameter_hash(model.params());
    EvalReport report;
    report.protocol = "transfer";
    report.entries.push_back(evaluate(model, target, target_data));
    if (nn::parameter_hash(model.params()) != before)
        throw Error("run_transfer: parameters changed during zero-shot evaluation");
    return report;
}

// ---------------------------------------------------------------------------
// sim2real

enum class Sim2RealMethod { Sim2Real, Real2Real, SimAndReal2Real };

inline const char* method_name(Sim2RealMethod m) {
    switch (m) {
        case Sim2RealMethod::Sim2Real: return "sim2real";
        case Sim2RealMethod::Real2Real: return "real2real";
        case Sim2RealMethod::SimAndReal2Real: return "sim&real2real";
    }
    return "?";
}

inline Sim2RealMethod parse_method(const std::string& s) {
    if (s == "sim2real") return Sim2RealMethod::Sim2Real;
    if (s == "real2real") return Sim2RealMethod::Real2Real;
    if (s == "sim&real2real" || s == "simreal2real") return Sim2RealMethod::SimAndReal2Real;
    throw ValidationError("unknown sim2real method '" + s + "'");
}

struct Sim2RealSpec {
    nn::CafkNetShape shape;
    TrainSpec train;
    std::uint64_t model_seed = 0;
    std::uint64_t split_seed = 0;
    double train_fraction = 0.8;
};

struct Sim2RealResult {
    EvalReport clean_test;
    EvalReport noise_test;
    nn::CafkNet<float> model;
};

/// Trains per the method's data recipe and evaluates on the held-out part of
/// the clean data and of the noise data (both split with the same seed):
///   sim2real:      all simulated
///   real2real:     train_fraction of clean
///   sim&real2real: all simulated + train_fraction of clean
inline Sim2RealResult run_sim2real(const CdprConfig& config, const data::Dataset& simulated, const data::Dataset& clean,
                                   const data::Dataset& noise, Sim2RealMethod method, const Sim2RealSpec& spec) {
    for (const auto* ds : {&simulated, &clean, &noise}) data::check_matches(config, *ds);
    const auto [clean_train, clean_test] = data::split(clean, spec.train_fraction, spec.split_seed);
    const auto noise_test = data::split(noise, spec.train_fraction, spec.split_seed).second;

    std::vector<TrainSet> sets;
    if (method != Sim2RealMethod::Real2Real) sets.push_back({&config, &simulated});
    if (method != Sim2RealMethod::Sim2Real) sets.push_back({&config, &clean_train});

    Sim2RealResult r{{}, {}, nn::CafkNet<float>(spec.shape, {config.name}, spec.model_seed)};
    train(r.model, sets, spec.train);
    r.clean_test.protocol = std::string(method_name(method)) + "/clean";
    r.clean_test.entries.push_back(evaluate(r.model, config, clean_test));
    r.noise_test.protocol = std::string(method_name(method)) + "/noise";
    r.noise_test.entries.push_back(evaluate(r.model, config, noise_test));
    return r;
}

// ---------------------------------------------------------------------------
// timing

/// Wall-clock seconds to solve every FK problem in `lengths` (m x n) one after
/// another with the optimization solver.
inline double bench_fk_opt(const CdprConfig& config, const Eigen::MatrixXd& lengths) {
    const auto settings = fk::FkOptSettings::defaults_for(config);
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0;
    for (Eigen::Index k = 0; k < lengths.cols(); ++k)
        sink += fk::solve_fk_opt(config, CableLengths(lengths.col(k)), settings).pose.x;
    const auto t1 = std::chrono::steady_clock::now();
    volatile double keep = sink;
    (void)keep;
    return std::chrono::duration<double>(t1 - t0).count();
}

/// Same for the learned solver: one graph and one forward pass per problem.
template <class S>
double bench_fk_cafknet(const nn::CafkNet<S>& model, const CdprConfig& config, const Eigen::MatrixXd& lengths) {
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0;
    for (Eigen::Index k = 0; k < lengths.cols(); ++k)
        sink += model.predict(build_graph(config, CableLengths(lengths.col(k)))).x;
    const auto t1 = std::chrono::steady_clock::now();
    volatile double keep = sink;
    (void)keep;
    return std::chrono::duration<double>(t1 - t0).count();
}

/// Median over `repeats` runs, which is less sensitive to scheduler noise.
template <class F>
double median_seconds(F&& run, int repeats) {
    std::vector<double> t;
    for (int k = 0; k < repeats; ++k) t.push_back(run());
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

}  // namespace cafk::exp
