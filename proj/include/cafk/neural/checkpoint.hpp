#pragma once

// Model checkpoints: a versioned JSON container with every MLP tensor,
// normalization constants, model shape and the decoder-head registry.
// Numbers are written in shortest round-trip form, so save -> load restores
// every parameter bit for bit.
//
//   {"format": "cafk-model", "version": 1, "kind": "cafknet" | "mlp",
//    "scalar": "float" | "double",
//    "normalization": {"length_scale": ..., "angle_scale": ...},
//    "shape": {...}, "heads": [...]          (cafknet)
//    "cable_count": m                        (mlp)
//    "mlps": {"<name>": [{"rows": r, "cols": c, "weight": [col-major], "bias": [...]}, ...], ...}}

#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <variant>

#include <nlohmann/json.hpp>

#include "cafk/neural/cafknet.hpp"
#include "cafk/neural/mlp_baseline.hpp"

namespace cafk::nn {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

template <class S>
constexpr const char* scalar_name() {
    return std::is_same_v<S, float> ? "float" : "double";
}

template <class S>
nlohmann::json mlp_to_json(const Mlp<S>& mlp) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : mlp.layers()) {
        nlohmann::json j;
        j["rows"] = l.weight.rows();
        j["cols"] = l.weight.cols();
        j["weight"] = std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size());
        j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
        layers.push_back(std::move(j));
    }
    return layers;
}

template <class S>
Mlp<S> mlp_from_json(const nlohmann::json& layers) {
    if (!layers.is_array() || layers.empty()) throw SchemaError("checkpoint: MLP must be a non-empty layer list");
    Mlp<S> mlp;
    for (const auto& j : layers) {
        for (const char* key : {"rows", "cols", "weight", "bias"})
            if (!j.contains(key)) throw SchemaError(std::string("checkpoint: layer missing '") + key + "'");
        const auto rows = j["rows"].get<Eigen::Index>();
        const auto cols = j["cols"].get<Eigen::Index>();
        const auto w = j["weight"].get<std::vector<double>>();
        const auto b = j["bias"].get<std::vector<double>>();
        if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
            static_cast<Eigen::Index>(b.size()) != rows)
            throw SchemaError("checkpoint: layer tensor sizes inconsistent");
        Linear<S> l;
        l.weight = Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols).template cast<S>();
        l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows).template cast<S>();
        if (!mlp.layers().empty() && mlp.layers().back().out_dim() != cols)
            throw SchemaError("checkpoint: consecutive layer widths disagree");
        mlp.layers().push_back(std::move(l));
    }
    return mlp;
}

inline nlohmann::json norm_to_json(const Normalization& n) {
    return {{"length_scale", n.length_scale}, {"angle_scale", n.angle_scale}};
}

inline Normalization norm_from_json(const nlohmann::json& j) {
    return {j.at("length_scale").get<double>(), j.at("angle_scale").get<double>()};
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        if (!j.is_object() || j.value("format", "") != "cafk-model")
            throw SchemaError("checkpoint " + path.string() + ": not a cafk-model file");
        if (j.value("version", -1) != kCheckpointVersion)
            throw SchemaError("checkpoint " + path.string() + ": unsupported version");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint " + path.string() + ": " + e.what());
    }
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

}  // namespace detail

template <class S>
nlohmann::json checkpoint_json(const CafkNet<S>& model) {
    const auto& p = model.params();
    nlohmann::json j;
    j["format"] = "cafk-model";
    j["version"] = kCheckpointVersion;
    j["kind"] = "cafknet";
    j["scalar"] = detail::scalar_name<S>();
    j["normalization"] = detail::norm_to_json(model.normalization());
    const auto& s = model.shape();
    j["shape"] = {{"hidden_dim", s.hidden_dim},
                  {"hidden_layers", s.hidden_layers},
                  {"hidden_width", s.hidden_width},
                  {"depth", s.depth}};
    j["heads"] = model.head_names();
    nlohmann::json mlps;
    mlps["enc_world"] = detail::mlp_to_json(p.enc_world);
    mlps["enc_cable"] = detail::mlp_to_json(p.enc_cable);
    mlps["enc_body"] = detail::mlp_to_json(p.enc_body);
    mlps["enc_wc"] = detail::mlp_to_json(p.enc_wc);
    mlps["enc_cb"] = detail::mlp_to_json(p.enc_cb);
    mlps["gamma_wc"] = detail::mlp_to_json(p.gamma_wc);
    mlps["gamma_cb"] = detail::mlp_to_json(p.gamma_cb);
    nlohmann::json heads = nlohmann::json::array();
    for (const auto& h : p.heads) heads.push_back(detail::mlp_to_json(h));
    mlps["heads"] = std::move(heads);
    j["mlps"] = std::move(mlps);
    return j;
}

template <class S>
nlohmann::json checkpoint_json(const MlpBaseline<S>& model) {
    nlohmann::json j;
    j["format"] = "cafk-model";
    j["version"] = kCheckpointVersion;
    j["kind"] = "mlp";
    j["scalar"] = detail::scalar_name<S>();
    j["normalization"] = detail::norm_to_json(model.normalization());
    j["cable_count"] = model.cable_count();
    j["mlps"] = {{"net", detail::mlp_to_json(model.params().net)}};
    return j;
}

template <class Model>
void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    detail::write_json(checkpoint_json(model), path);
}

template <class S>
CafkNet<S> cafknet_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind") != "cafknet") throw SchemaError("checkpoint: not a cafknet model");
        CafkNetShape shape;
        const auto& s = j.at("shape");
        shape.hidden_dim = s.at("hidden_dim").get<int>();
        shape.hidden_layers = s.at("hidden_layers").get<int>();
        shape.hidden_width = s.at("hidden_width").get<int>();
        shape.depth = s.at("depth").get<int>();
        const auto& m = j.at("mlps");
        CafkNetParams<S> p;
        p.enc_world = detail::mlp_from_json<S>(m.at("enc_world"));
        p.enc_cable = detail::mlp_from_json<S>(m.at("enc_cable"));
        p.enc_body = detail::mlp_from_json<S>(m.at("enc_body"));
        p.enc_wc = detail::mlp_from_json<S>(m.at("enc_wc"));
        p.enc_cb = detail::mlp_from_json<S>(m.at("enc_cb"));
        p.gamma_wc = detail::mlp_from_json<S>(m.at("gamma_wc"));
        p.gamma_cb = detail::mlp_from_json<S>(m.at("gamma_cb"));
        for (const auto& h : m.at("heads")) p.heads.push_back(detail::mlp_from_json<S>(h));
        return CafkNet<S>(shape, detail::norm_from_json(j.at("normalization")),
                          j.at("heads").get<std::vector<std::string>>(), std::move(p));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

template <class S>
MlpBaseline<S> mlp_baseline_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind") != "mlp") throw SchemaError("checkpoint: not an mlp model");
        MlpBaselineParams<S> p;
        p.net = detail::mlp_from_json<S>(j.at("mlps").at("net"));
        return MlpBaseline<S>(j.at("cable_count").get<std::size_t>(), detail::norm_from_json(j.at("normalization")),
                              std::move(p));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
}

template <class S>
using AnyModel = std::variant<CafkNet<S>, MlpBaseline<S>>;

/// Loads either model kind; the stored values are converted to `S`.
template <class S>
AnyModel<S> load_checkpoint(const std::filesystem::path& path) {
    const nlohmann::json j = detail::read_json(path);
    const std::string kind = j.value("kind", "");
    if (kind == "cafknet") return cafknet_from_json<S>(j);
    if (kind == "mlp") return mlp_baseline_from_json<S>(j);
    throw SchemaError("checkpoint " + path.string() + ": unknown model kind '" + kind + "'");
}

}  // namespace cafk::nn
