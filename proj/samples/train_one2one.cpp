// Trains a small CafkNet on one configuration and reports held-out RMSE.

#include <iostream>

#include "cafk/cafk.hpp"

int main() {
    using namespace cafk;
    const auto config = bundled_config("simc6");
    const auto [train, test] = data::split(data::gen_dataset(config, 20, 100, 1), 0.8, 2);

    nn::CafkNet<float> model(nn::CafkNetShape{32, 2, 32, 2}, {config.name}, 3);
    exp::TrainSpec spec;
    spec.epochs = 40;
    const auto result = exp::train(model, config, train, spec);
    for (const auto& e : result.curve)
        if (e.epoch % 10 == 9) std::cout << "epoch " << e.epoch + 1 << ": train RMSE " << e.position_rmse << " mm\n";

    std::cout << "test RMSE " << exp::evaluate_rmse(model, config, test) << " mm (workspace diagonal "
              << config.workspace_diagonal() << " mm)\n";
}
