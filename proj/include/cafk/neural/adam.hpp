#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cafk/neural/params.hpp"

namespace cafk::nn {

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment accumulators mirror the parameter tensors one to one.
template <class S>
struct AdamState {
    AdamHyper hyper;
    long step = 0;
    std::vector<Vector<S>> first;
    std::vector<Vector<S>> second;

    AdamState() = default;

    template <ParamSet P>
    explicit AdamState(const P& params, AdamHyper h = {}) : hyper(h) {
        for_each_tensor(params, [&](const S*, std::size_t n) {
            first.push_back(Vector<S>::Zero(static_cast<Eigen::Index>(n)));
            second.push_back(Vector<S>::Zero(static_cast<Eigen::Index>(n)));
        });
    }
};

/// One bias-corrected Adam update of `params` in place.
template <class S, ParamSet P>
void adam_step(AdamState<S>& state, P& params, const P& grads) {
    if (tensor_count(params) != state.first.size() || !same_shape(params, grads))
        throw ShapeMismatch("adam_step: optimizer state, parameters and gradients differ in shape");

    std::vector<std::pair<const S*, std::size_t>> g;
    for_each_tensor(grads, [&](const S* data, std::size_t n) { g.emplace_back(data, n); });

    ++state.step;
    const auto& h = state.hyper;
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
    const S b1 = static_cast<S>(h.beta1), b2 = static_cast<S>(h.beta2);
    const S lr = static_cast<S>(h.learning_rate), eps = static_cast<S>(h.epsilon);
    const S inv_c1 = static_cast<S>(1.0 / c1), inv_c2 = static_cast<S>(1.0 / c2);

    std::size_t t = 0;
    for_each_tensor(params, [&](S* p, std::size_t n) {
        if (state.first[t].size() != static_cast<Eigen::Index>(n))
            throw ShapeMismatch("adam_step: tensor size mismatch");
        S* m = state.first[t].data();
        S* v = state.second[t].data();
        const S* gt = g[t].first;
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (S(1) - b1) * gt[i];
            v[i] = b2 * v[i] + (S(1) - b2) * gt[i] * gt[i];
            const S mhat = m[i] * inv_c1;
            const S vhat = v[i] * inv_c2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        ++t;
    });
}

}  // namespace cafk::nn
