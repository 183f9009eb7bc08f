#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "cafk/config_io.hpp"
#include "cafk/data.hpp"
#include "cafk/graph.hpp"

using namespace cafk;

TEST(BuildGraph, NodeAndEdgeCounts) {
    const auto c = bundled_config("simc4");
    const auto g = build_graph(c, inverse_kinematics(c, {500, 500, 500, 0, 0, 0}));
    EXPECT_EQ(g.node_count(), 6u);
    EXPECT_EQ(g.edge_count(), 8u);
    EXPECT_EQ(g.cable_features.size(), 4u);
    EXPECT_EQ(g.edge_wc_features.size(), 4u);
    EXPECT_EQ(g.edge_cb_features.size(), 4u);
}

TEST(BuildGraph, FixedNodeFeaturesAndEdges) {
    const auto c = bundled_config("simc7");
    const auto g = build_graph(c, inverse_kinematics(c, {400, 500, 600, 0.1, 0, 0}));
    EXPECT_EQ(g.world_feature, Vec3::Zero());
    EXPECT_EQ(g.body_feature, Vec6::Zero());
    EXPECT_EQ(g.edge_wc_features, c.frame_anchors);
    EXPECT_EQ(g.edge_cb_features, c.ee_offsets);
    EXPECT_EQ(g.config_name, "simc7");
}

TEST(BuildGraph, ZeroLengthsPassThrough) {
    const auto c = bundled_config("simc6");
    const auto g = build_graph(c, CableLengths(Eigen::VectorXd::Zero(6)));
    const auto ref = build_graph(c, inverse_kinematics(c, {500, 500, 500, 0, 0, 0}));
    EXPECT_TRUE(std::all_of(g.cable_features.begin(), g.cable_features.end(), [](double v) { return v == 0.0; }));
    EXPECT_EQ(g.edge_wc_features, ref.edge_wc_features);
    EXPECT_EQ(g.edge_cb_features, ref.edge_cb_features);
}

TEST(BuildGraph, CableFeaturesEqualIk) {
    const auto c = bundled_config("simc8");
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
        const Pose p = data::random_pose(c, rng);
        const auto l = inverse_kinematics(c, p);
        const auto g = build_graph(c, l);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(g.cable_features[i], l[i]);
    }
}

TEST(BuildGraph, WrongCountIsConfigMismatch) {
    EXPECT_THROW(build_graph(bundled_config("simc6"), CableLengths{1, 2, 3, 4}), ConfigMismatch);
}

TEST(BuildGraph, DeterministicAndPure) {
    const auto c = bundled_config("simc9");
    const auto l = inverse_kinematics(c, {450, 520, 300, 0, 0.2, 0});
    EXPECT_EQ(build_graph(c, l), build_graph(c, l));
}

TEST(Permutation, RelabelingGivesIsomorphicGraph) {
    const auto c = bundled_config("simc10");
    std::mt19937_64 rng(6);
    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (int k = 0; k < 20; ++k) {
        std::shuffle(perm.begin(), perm.end(), rng);
        const Pose p = data::random_pose(c, rng);
        const auto pc = permute_cables(c, perm);
        // Building from the relabeled robot equals relabeling the built graph,
        // apart from the slot-to-cable bookkeeping.
        auto from_relabeled = build_graph(pc, inverse_kinematics(pc, p));
        const auto relabeled = permute_cables(build_graph(c, inverse_kinematics(c, p)), perm);
        EXPECT_EQ(relabeled.cable_order, perm);
        from_relabeled.cable_order = perm;
        EXPECT_EQ(from_relabeled, relabeled);
    }
}

TEST(Permutation, RejectsNonPermutations) {
    const auto c = bundled_config("simc4");
    const auto g = build_graph(c, CableLengths{1, 2, 3, 4});
    EXPECT_THROW(permute_cables(g, {0, 1, 2}), ShapeMismatch);
    EXPECT_THROW(permute_cables(g, {0, 1, 1, 2}), ValidationError);
    EXPECT_THROW(permute_cables(g, {0, 1, 2, 4}), ValidationError);
}

TEST(GraphDump, ListsEveryNodeAndEdge) {
    const auto c = bundled_config("simc4");
    std::ostringstream out;
    data::write_graph_dump(build_graph(c, CableLengths{1, 2, 3, 4}), out);
    const std::string s = out.str();
    EXPECT_NE(s.find("simc4"), std::string::npos);
    EXPECT_NE(s.find("nodes=6\n"), std::string::npos);
    EXPECT_NE(s.find("edges=8\n"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 9 + 4) << s;
}
