#pragma once

// Heterogeneous graph view of a CDPR: one world node, m cable nodes, one body
// node, m world->cable edges and m cable->body edges. The star topology is
// fixed, so the graph is stored as feature arrays indexed by cable.

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "cafk/core.hpp"

namespace cafk {

struct CdprGraph {
    std::string config_name;
    Vec3 world_feature = Vec3::Zero();
    Vec6 body_feature = Vec6::Zero();
    std::vector<double> cable_features;   // cable lengths, mm
    std::vector<Vec3> edge_wc_features;   // frame anchors A_i, mm
    std::vector<Vec3> edge_cb_features;   // end-effector offsets v_i, mm
    std::vector<std::size_t> cable_order; // original cable index of each slot

    std::size_t cable_count() const { return cable_features.size(); }
    std::size_t node_count() const { return cable_count() + 2; }
    std::size_t edge_count() const { return 2 * cable_count(); }

    friend bool operator==(const CdprGraph& a, const CdprGraph& b) {
        return a.config_name == b.config_name && a.world_feature == b.world_feature &&
               a.body_feature == b.body_feature && a.cable_features == b.cable_features &&
               a.edge_wc_features == b.edge_wc_features && a.edge_cb_features == b.edge_cb_features &&
               a.cable_order == b.cable_order;
    }
};

/// Assembles the FK graph for `lengths` on `config`.
///
/// The cable->body edge carries the body-frame offset v_i rather than the
/// world-frame attachment point, which would depend on the unknown pose.
inline CdprGraph build_graph(const CdprConfig& config, const CableLengths& lengths) {
    if (lengths.size() != config.cable_count())
        throw ConfigMismatch("build_graph: " + std::to_string(lengths.size()) + " lengths for config '" +
                             config.name + "' with " + std::to_string(config.cable_count()) + " cables");
    CdprGraph g;
    g.config_name = config.name;
    g.cable_features.assign(lengths.values().data(), lengths.values().data() + lengths.size());
    g.edge_wc_features = config.frame_anchors;
    g.edge_cb_features = config.ee_offsets;
    g.cable_order.resize(config.cable_count());
    std::iota(g.cable_order.begin(), g.cable_order.end(), std::size_t{0});
    return g;
}

/// Relabels cables: slot k of the result holds slot perm[k] of `g`.
inline CdprGraph permute_cables(const CdprGraph& g, const std::vector<std::size_t>& perm) {
    const std::size_t m = g.cable_count();
    if (perm.size() != m) throw ShapeMismatch("permute_cables: permutation size mismatch");
    std::vector<bool> seen(m, false);
    for (std::size_t p : perm) {
        if (p >= m || seen[p]) throw ValidationError("permute_cables: not a permutation");
        seen[p] = true;
    }
    CdprGraph out = g;
    for (std::size_t k = 0; k < m; ++k) {
        out.cable_features[k] = g.cable_features[perm[k]];
        out.edge_wc_features[k] = g.edge_wc_features[perm[k]];
        out.edge_cb_features[k] = g.edge_cb_features[perm[k]];
        out.cable_order[k] = g.cable_order[perm[k]];
    }
    return out;
}

/// Same relabeling applied to a config (anchors and offsets move together).
inline CdprConfig permute_cables(const CdprConfig& c, const std::vector<std::size_t>& perm) {
    if (perm.size() != c.cable_count()) throw ShapeMismatch("permute_cables: permutation size mismatch");
    CdprConfig out = c;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        out.frame_anchors[k] = c.frame_anchors.at(perm[k]);
        out.ee_offsets[k] = c.ee_offsets.at(perm[k]);
    }
    return out;
}

}  // namespace cafk
