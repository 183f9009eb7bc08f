#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cafk/config_io.hpp"

using namespace cafk;

namespace {

void expect_same(const CdprConfig& a, const CdprConfig& b) {
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.planar, b.planar);
    EXPECT_EQ(a.frame_anchors, b.frame_anchors);
    EXPECT_EQ(a.ee_offsets, b.ee_offsets);
    EXPECT_EQ(a.pose_lower, b.pose_lower);
    EXPECT_EQ(a.pose_upper, b.pose_upper);
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("cafk_test_config_io_" + name);
}

}  // namespace

TEST(Bundled, AllConfigsAreValid) {
    ASSERT_EQ(bundled_config_names().size(), 8u);
    for (const auto& c : bundled_configs()) {
        EXPECT_NO_THROW(c.validate()) << c.name;
    }
}

TEST(Bundled, CableCountsFollowNames) {
    for (const auto& name : spatial_config_names()) {
        const auto c = bundled_config(name);
        EXPECT_EQ(std::to_string(c.cable_count()), name.substr(4));
        EXPECT_FALSE(c.planar);
    }
    const auto e = bundled_config("expc4");
    EXPECT_TRUE(e.planar);
    EXPECT_EQ(e.cable_count(), 4u);
}

TEST(Bundled, SpatialBoundsAndGuess) {
    const auto c = bundled_config("simc6");
    Vec6 lo, hi;
    lo << 100, 100, 100, -0.26, -0.26, 0;
    hi << 900, 900, 900, 0.26, 0.26, 0;
    EXPECT_EQ(c.pose_lower, lo);
    EXPECT_EQ(c.pose_upper, hi);
}

TEST(Bundled, UnknownNameThrows) { EXPECT_THROW(bundled_config("simc11"), ValidationError); }

TEST(ConfigFile, RoundTripsEveryBundledConfig) {
    for (const auto& c : bundled_configs()) {
        const auto path = temp_path(c.name + ".json");
        save_config_file(c, path);
        expect_same(load_config_file(path), c);
        expect_same(resolve_config(path.string()), c);
        std::filesystem::remove(path);
    }
}

TEST(ConfigFile, SchemaViolationsAreRejected) {
    const auto base = nlohmann::json(config_to_json(bundled_config("simc6")));
    auto j = base;
    j.erase("planar");
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["extra"] = 1;
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["version"] = 2;
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["cable_count"] = 5;
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["frame_anchors"][0] = {1, 2};
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["pose_lower"][0] = "a";
    EXPECT_THROW(config_from_json(j), SchemaError);
    j = base;
    j["pose_lower"][0] = 950;  // above the upper bound
    EXPECT_THROW(config_from_json(j), ValidationError);
}

TEST(ConfigFile, MalformedFileIsSchemaError) {
    const auto path = temp_path("broken.json");
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_config_file(path), SchemaError);
    std::filesystem::remove(path);
}

TEST(ConfigFile, ResolveUnknownIsIoError) {
    EXPECT_THROW(resolve_config("/nonexistent/config.json"), IoError);
    EXPECT_EQ(resolve_config("simc8").cable_count(), 8u);
}
