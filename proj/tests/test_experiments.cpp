#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cafk/config_io.hpp"
#include "cafk/data.hpp"
#include "cafk/experiments.hpp"
#include "cafk/neural/params.hpp"
#include "cafk/report.hpp"

using namespace cafk;
using namespace cafk::exp;

namespace {

const nn::CafkNetShape kTiny{8, 1, 8, 1};

TrainSpec quick(int epochs, std::uint64_t seed = 0) {
    TrainSpec s;
    s.epochs = epochs;
    s.seed = seed;
    s.learning_rate = 3e-3;
    return s;
}

}  // namespace

TEST(Rmse, IdenticalIsZero) {
    const std::vector<Pose> p{{1, 2, 3, 0, 0, 0}, {4, 5, 6, 0.1, 0, 0}};
    EXPECT_EQ(rmse_position(p, p), 0.0);
}

TEST(Rmse, ThreeFourFive) {
    EXPECT_EQ(rmse_position({{3, 4, 0, 0, 0, 0}}, {{0, 0, 0, 0, 0, 0}}), 5.0);
}

TEST(Rmse, MatchesBruteForce) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 10);
    std::vector<Pose> a, b;
    double sum = 0;
    for (int k = 0; k < 100; ++k) {
        a.push_back({n(rng), n(rng), n(rng), n(rng), n(rng), n(rng)});
        b.push_back({n(rng), n(rng), n(rng), n(rng), n(rng), n(rng)});
        const double dx = a.back().x - b.back().x, dy = a.back().y - b.back().y, dz = a.back().z - b.back().z;
        sum += dx * dx + dy * dy + dz * dz;
    }
    EXPECT_NEAR(rmse_position(a, b), std::sqrt(sum / 100), 1e-12);
}

TEST(Rmse, OrientationIsIgnored) {
    std::vector<Pose> a{{1, 2, 3, 0, 0, 0}}, b{{2, 2, 3, 0, 0, 0}};
    const double r = rmse_position(a, b);
    b[0].roll = 1.0, b[0].pitch = -2.0, b[0].yaw = 3.0;
    EXPECT_EQ(rmse_position(a, b), r);
}

TEST(Rmse, EmptyAndMismatched) {
    EXPECT_THROW(rmse_position({}, {}), EmptyInput);
    EXPECT_THROW(rmse_position({Pose{}}, {}), ShapeMismatch);
}

TEST(Train, ZeroEpochsLeavesModelUnchanged) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 2, 20, 1);
    nn::CafkNet<float> net(kTiny, {c.name}, 1);
    const auto before = nn::parameter_hash(net.params());
    const auto r = train(net, c, ds, quick(0));
    EXPECT_TRUE(r.curve.empty());
    EXPECT_EQ(nn::parameter_hash(net.params()), before);
}

TEST(Train, DeterministicUnderFixedSeed) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 3, 30, 1);
    nn::CafkNet<float> a(kTiny, {c.name}, 4), b(kTiny, {c.name}, 4);
    train(a, c, ds, quick(3, 9));
    train(b, c, ds, quick(3, 9));
    EXPECT_EQ(nn::parameter_hash(a.params()), nn::parameter_hash(b.params()));
    nn::CafkNet<float> d(kTiny, {c.name}, 4);
    train(d, c, ds, quick(3, 10));
    EXPECT_NE(nn::parameter_hash(a.params()), nn::parameter_hash(d.params()));
}

TEST(Train, LossDecreases) {
    const auto c = bundled_config("simc7");
    const auto ds = data::gen_dataset(c, 5, 40, 2);
    nn::CafkNet<float> net(nn::CafkNetShape{16, 1, 16, 1}, {c.name}, 5);
    const auto r = train(net, c, ds, quick(30, 1));
    ASSERT_EQ(r.curve.size(), 30u);
    EXPECT_LT(r.curve.back().loss, 0.2 * r.curve.front().loss);
    EXPECT_LT(r.curve.back().position_rmse, r.curve.front().position_rmse);
}

TEST(Train, PlateauDecaysLearningRate) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 1, 10, 2);
    nn::CafkNet<float> net(kTiny, {c.name}, 5);
    auto spec = quick(12, 1);
    spec.learning_rate = 1e-9;  // effectively frozen, so the loss plateaus
    spec.min_learning_rate = 1e-12;
    spec.lr_patience = 2;
    const auto r = train(net, c, ds, spec);
    EXPECT_LT(r.curve.back().learning_rate, spec.learning_rate);
}

TEST(Train, DecayFloorNeverRaisesLearningRate) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 1, 10, 2);
    nn::CafkNet<float> net(kTiny, {c.name}, 5);
    auto spec = quick(12, 1);
    spec.learning_rate = 1e-9;  // already below the floor
    spec.lr_patience = 2;
    for (const auto& e : train(net, c, ds, spec).curve) EXPECT_EQ(e.learning_rate, 1e-9);
}

TEST(Train, NonFiniteLossIsDivergence) {
    const auto c = bundled_config("simc6");
    auto ds = data::gen_dataset(c, 1, 10, 2);
    ds.samples[3].pose.x = 1e300;
    nn::CafkNet<float> net(kTiny, {c.name}, 5);
    EXPECT_THROW(train(net, c, ds, quick(1)), DivergenceDetected);
}

TEST(Train, SpecValidation) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 1, 10, 2);
    nn::CafkNet<float> net(kTiny, {c.name}, 5);
    auto spec = quick(1);
    spec.batch_size = 0;
    EXPECT_THROW(train(net, c, ds, spec), ValidationError);
    EXPECT_THROW(train(net, std::vector<TrainSet>{}, quick(1)), EmptyInput);
    EXPECT_THROW(train(net, bundled_config("simc7"), ds, quick(1)), ConfigMismatch);
}

TEST(Train, MultiTaskHeadsAreEvaluableIndependently) {
    const auto c6 = bundled_config("simc6"), c8 = bundled_config("simc8");
    const auto d6 = data::gen_dataset(c6, 2, 20, 1), d8 = data::gen_dataset(c8, 2, 20, 2);
    nn::CafkNet<float> net(kTiny, {"simc6", "simc8"}, 3);
    train(net, {{&c6, &d6}, {&c8, &d8}}, quick(3));
    EXPECT_GE(evaluate_rmse(net, c6, d6), 0.0);
    EXPECT_GE(evaluate_rmse(net, c8, d8), 0.0);
    const auto c7 = bundled_config("simc7");
    EXPECT_THROW(evaluate_rmse(net, c7, data::gen_dataset(c7, 1, 5, 1)), ConfigMismatch);
}

TEST(Train, MlpBaselineSharesHarness) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 3, 30, 1);
    nn::MlpBaseline<float> mlp(6, 2, 32, 1);
    const auto r = train(mlp, c, ds, quick(20, 2));
    EXPECT_LT(r.curve.back().loss, r.curve.front().loss);
}

TEST(Transfer, IdentityTransferEqualsEvaluation) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 2, 20, 1);
    nn::CafkNet<float> net(kTiny, {c.name}, 3);
    train(net, c, ds, quick(2));
    const auto r = run_transfer(net, {"simc6"}, c, ds);
    ASSERT_EQ(r.entries.size(), 1u);
    EXPECT_EQ(r.entries[0].rmse_mm, evaluate_rmse(net, c, ds));
    EXPECT_EQ(r.entries[0].samples, ds.size());
}

TEST(Transfer, ZeroShotOnEveryConfigLeavesParameters) {
    const auto src = bundled_config("simc6");
    nn::CafkNet<float> net(kTiny, {src.name}, 3);
    const auto before = nn::parameter_hash(net.params());
    for (const auto& c : bundled_configs()) {
        const auto r = run_transfer(net, {src.name}, c, data::gen_dataset(c, 1, 10, 4));
        EXPECT_GT(r.entries[0].rmse_mm, 0.0);
    }
    EXPECT_EQ(nn::parameter_hash(net.params()), before);
}

TEST(Transfer, MultiSourceMustExcludeTarget) {
    const auto c = bundled_config("simc6");
    nn::CafkNet<float> net(kTiny, {"shared"}, 3);
    EXPECT_THROW(run_transfer(net, {"simc6", "simc7"}, c, data::gen_dataset(c, 1, 5, 1)), ValidationError);
    EXPECT_NO_THROW(run_transfer(net, {"simc7", "simc8"}, c, data::gen_dataset(c, 1, 5, 1)));
}

TEST(Sim2Real, MethodNames) {
    for (auto m : {Sim2RealMethod::Sim2Real, Sim2RealMethod::Real2Real, Sim2RealMethod::SimAndReal2Real})
        EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_THROW(parse_method("real2sim"), ValidationError);
}

TEST(Sim2Real, IdenticalCleanAndNoiseGiveIdenticalReports) {
    const auto c = bundled_config("expc4");
    const auto sim = data::gen_dataset(c, 2, 30, 1);
    const auto clean = data::gen_dataset(c, 1, 50, 2);
    Sim2RealSpec spec;
    spec.shape = kTiny;
    spec.train = quick(2);
    for (auto m : {Sim2RealMethod::Sim2Real, Sim2RealMethod::Real2Real, Sim2RealMethod::SimAndReal2Real}) {
        const auto r = run_sim2real(c, sim, clean, clean, m, spec);
        EXPECT_EQ(r.clean_test.entries[0].rmse_mm, r.noise_test.entries[0].rmse_mm);
        EXPECT_EQ(r.clean_test.entries[0].samples, 10u);
    }
}

TEST(Sim2Real, RejectsForeignData) {
    const auto c = bundled_config("expc4");
    const auto other = bundled_config("simc4");
    const auto d = data::gen_dataset(c, 1, 10, 1);
    Sim2RealSpec spec;
    spec.shape = kTiny;
    spec.train = quick(1);
    EXPECT_THROW(run_sim2real(c, data::gen_dataset(other, 1, 10, 1), d, d, Sim2RealMethod::Sim2Real, spec),
                 ConfigMismatch);
}

TEST(Bench, EmptyTrajectoryTakesNoTime) {
    const auto c = bundled_config("simc6");
    const nn::CafkNet<float> net(kTiny, {c.name}, 1);
    EXPECT_LT(bench_fk_opt(c, Eigen::MatrixXd(6, 0)), 1e-3);
    EXPECT_LT(bench_fk_cafknet(net, c, Eigen::MatrixXd(6, 0)), 1e-3);
    const auto ds = data::gen_dataset(c, 1, 100, 1);
    EXPECT_GT(bench_fk_opt(c, ds.lengths_matrix()), 0.0);
}

TEST(Report, JsonCsvAndSvg) {
    const auto c = bundled_config("simc6");
    const auto ds = data::gen_dataset(c, 2, 5, 1);
    const nn::CafkNet<float> net(kTiny, {c.name}, 1);
    const auto preds = predict(net, c, ds);

    EvalReport r{"one2one", {evaluate(net, c, ds)}};
    const auto j = report::to_json(r);
    EXPECT_EQ(j["protocol"], "one2one");
    EXPECT_EQ(j["entries"][0]["config"], "simc6");
    EXPECT_EQ(j["entries"][0]["samples"], 10);
    EXPECT_DOUBLE_EQ(j["entries"][0]["rmse_mm"].get<double>(), rmse_position(preds, ds.poses()));

    std::ostringstream csv;
    report::write_csv(ds, preds, csv);
    const std::string s = csv.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 11);
    EXPECT_EQ(s.rfind("trajectory,ref_x,ref_y,ref_z,pred_x,pred_y,pred_z,error_mm\n", 0), 0u);

    std::ostringstream svg;
    report::write_svg(ds, preds, 1, svg);
    EXPECT_NE(svg.str().find("<polyline"), std::string::npos);
    EXPECT_THROW(report::write_svg(ds, preds, 7, svg), EmptyInput);
}
