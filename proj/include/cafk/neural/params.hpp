#pragma once

// Generic helpers over "parameter sets": any type exposing `mlps()` that
// returns pointers to its MLPs in a fixed order. Gradients use the same type.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <vector>

#include "cafk/neural/mlp.hpp"

namespace cafk::nn {

template <class P>
concept ParamSet = requires(P& p, const P& cp) {
    { p.mlps() };
    { cp.mlps() };
};

/// Calls f(data, size) for every weight matrix and bias vector, in order.
template <ParamSet P, class F>
void for_each_tensor(P& params, F&& f) {
    for (auto* mlp : params.mlps())
        for (auto& l : mlp->layers()) {
            f(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
            f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
        }
}

template <ParamSet P>
std::size_t tensor_count(const P& params) {
    std::size_t n = 0;
    for (const auto* mlp : params.mlps()) n += 2 * mlp->layers().size();
    return n;
}

template <ParamSet P>
std::size_t parameter_count(const P& params) {
    std::size_t n = 0;
    for (const auto* mlp : params.mlps()) n += mlp->parameter_count();
    return n;
}

template <ParamSet P>
bool same_shape(const P& a, const P& b) {
    const auto ma = a.mlps();
    const auto mb = b.mlps();
    if (ma.size() != mb.size()) return false;
    for (std::size_t k = 0; k < ma.size(); ++k)
        if (!ma[k]->same_shape(*mb[k])) return false;
    return true;
}

template <ParamSet P>
void set_zero(P& params) {
    for (auto* mlp : params.mlps()) mlp->set_zero();
}

/// Flattened copy of all parameters in tensor order.
template <ParamSet P>
std::vector<double> flatten(const P& params) {
    std::vector<double> out;
    for (const auto* mlp : params.mlps())
        for (const auto& l : mlp->layers()) {
            out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
            out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
        }
    return out;
}

/// FNV-1a over the raw bytes of every parameter; changes with any bit flip.
template <ParamSet P>
std::uint64_t parameter_hash(const P& params) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto* mlp : params.mlps())
        for (const auto& l : mlp->layers()) {
            const std::int64_t dims[2] = {l.weight.rows(), l.weight.cols()};
            mix(dims, sizeof dims);
            mix(l.weight.data(), sizeof(*l.weight.data()) * static_cast<std::size_t>(l.weight.size()));
            mix(l.bias.data(), sizeof(*l.bias.data()) * static_cast<std::size_t>(l.bias.size()));
        }
    return h;
}

}  // namespace cafk::nn
