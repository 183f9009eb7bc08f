// cafk: command-line front end for data generation, training, evaluation,
// FK/IK solving, transfer, sim2real and timing runs.
//
// Exit status: 0 success, 1 I/O or validation error, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cafk/cafk.hpp"

namespace {

using namespace cafk;

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError(what + ": '" + item + "' is not a number");
        }
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + data::format_number(v[k]);
    return s;
}

std::string pose_csv(const Pose& p) { return join({p.x, p.y, p.z, p.roll, p.pitch, p.yaw}); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

struct ShapeFlags {
    std::string model_config;
    int hidden_dim = 128, hidden_layers = 2, hidden_width = 128, depth = 2;

    void add(CLI::App* app) {
        app->add_option("--model-config", model_config,
                        "JSON file with any of hidden_dim, hidden_layers, hidden_width, depth (overrides flags)");
        app->add_option("--hidden-dim", hidden_dim, "Embedding width H")->capture_default_str();
        app->add_option("--hidden-layers", hidden_layers, "Hidden layers per MLP")->capture_default_str();
        app->add_option("--hidden-width", hidden_width, "Width of hidden layers")->capture_default_str();
        app->add_option("--depth", depth, "Message-propagation blocks N")->capture_default_str();
    }

    nn::CafkNetShape shape() const {
        nn::CafkNetShape s{hidden_dim, hidden_layers, hidden_width, depth};
        if (!model_config.empty()) {
            std::ifstream in(model_config);
            if (!in) throw IoError("cannot open model config " + model_config);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
                for (const auto& [key, _] : j.items())
                    if (key != "hidden_dim" && key != "hidden_layers" && key != "hidden_width" && key != "depth")
                        throw SchemaError("model config: unknown field '" + key + "'");
                s.hidden_dim = j.value("hidden_dim", s.hidden_dim);
                s.hidden_layers = j.value("hidden_layers", s.hidden_layers);
                s.hidden_width = j.value("hidden_width", s.hidden_width);
                s.depth = j.value("depth", s.depth);
            } catch (const nlohmann::json::exception& e) {
                throw SchemaError("model config " + model_config + ": " + e.what());
            }
        }
        s.validate();
        return s;
    }
};

struct TrainFlags {
    exp::TrainSpec spec;

    void add(CLI::App* app) {
        app->add_option("--epochs", spec.epochs, "Training epochs")->capture_default_str();
        app->add_option("--batch-size", spec.batch_size, "Minibatch size")->capture_default_str();
        app->add_option("--lr", spec.learning_rate, "Adam learning rate")->capture_default_str();
        app->add_option("--lr-decay", spec.lr_decay_factor, "Plateau learning-rate decay factor")
            ->capture_default_str();
        app->add_option("--patience", spec.lr_patience, "Epochs without improvement before decaying")
            ->capture_default_str();
        app->add_option("--train-seed", spec.seed, "Minibatch shuffling seed")->capture_default_str();
    }
};

void print_curve(const exp::TrainResult& r, const std::string& path) {
    if (path.empty()) return;
    std::ostringstream out;
    out << "epoch,loss,position_rmse_mm,learning_rate\n";
    for (const auto& e : r.curve)
        out << e.epoch << ',' << data::format_number(e.loss) << ',' << data::format_number(e.position_rmse) << ','
            << data::format_number(e.learning_rate) << '\n';
    write_text(path, out.str());
}

template <class F>
auto with_model(const std::string& path, F&& f) {
    auto model = nn::load_checkpoint<float>(path);
    return std::visit(f, model);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CDPR kinematics toolkit: IK, optimization FK and the CafkNet graph network"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cafk 1.0");

    // gen-data
    std::string config, out, data_path;
    std::uint64_t seed = 0;
    std::size_t trajectories = 100, samples = 100;
    auto* gen = app.add_subcommand("gen-data", "Generate an IK-labelled dataset of random polynomial trajectories");
    gen->add_option("--config", config, "Bundled config name or config file")->required();
    gen->add_option("--trajectories", trajectories, "Number of trajectories")->capture_default_str();
    gen->add_option("--samples", samples, "Samples per trajectory")->capture_default_str();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--out", out, "Output dataset file")->required();

    // inject-noise
    double sigma = 0;
    auto* noise = app.add_subcommand("inject-noise", "Relabel lengths with anchor/offset Gaussian noise");
    noise->add_option("--config", config, "Bundled config name or config file")->required();
    noise->add_option("--data", data_path, "Input dataset file")->required();
    noise->add_option("--sigma", sigma, "Noise standard deviation (mm)")->required();
    noise->add_option("--seed", seed, "Random seed")->capture_default_str();
    noise->add_option("--out", out, "Output dataset file")->required();

    // train
    std::vector<std::string> configs, datas;
    std::string model_type = "cafknet", heads = "per-config", curve_path;
    std::uint64_t model_seed = 0;
    int mlp_layers = 2, mlp_width = 128;
    ShapeFlags shape_flags;
    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "Train a model on one or more datasets");
    train->add_option("--config", configs, "Config of each dataset (repeat for multi-config training)")->required();
    train->add_option("--data", datas, "Dataset files, in the same order as --config")
        ->required();
    train->add_option("--model-type", model_type, "cafknet or mlp")
        ->check(CLI::IsMember({"cafknet", "mlp"}))
        ->capture_default_str();
    train->add_option("--heads", heads, "per-config: one decoder per config; shared: a single decoder")
        ->check(CLI::IsMember({"per-config", "shared"}))
        ->capture_default_str();
    train->add_option("--model-seed", model_seed, "Weight initialization seed")->capture_default_str();
    train->add_option("--mlp-layers", mlp_layers, "Hidden layers of the mlp baseline")->capture_default_str();
    train->add_option("--mlp-width", mlp_width, "Hidden width of the mlp baseline")->capture_default_str();
    shape_flags.add(train);
    train_flags.add(train);
    train->add_option("--curve", curve_path, "Optional CSV file for the per-epoch loss curve");
    train->add_option("--out", out, "Output checkpoint file")->required();

    // eval
    std::string model_path, report_path, csv_path, svg_path, protocol = "one2one";
    std::size_t svg_trajectory = 0;
    auto* eval = app.add_subcommand("eval", "Position RMSE of a model on a dataset");
    eval->add_option("--model", model_path, "Checkpoint file")->required();
    eval->add_option("--config", config, "Bundled config name or config file")->required();
    eval->add_option("--data", data_path, "Dataset file")->required();
    eval->add_option("--protocol", protocol, "Protocol tag stored in the report")->capture_default_str();
    eval->add_option("--report", report_path, "Optional JSON report file");
    eval->add_option("--csv", csv_path, "Optional per-sample CSV file");
    eval->add_option("--svg", svg_path, "Optional SVG plot of one trajectory");
    eval->add_option("--svg-trajectory", svg_trajectory, "Trajectory index plotted by --svg")
        ->capture_default_str();

    // solve-ik
    std::string pose_text, lengths_text;
    auto* ik = app.add_subcommand("solve-ik", "Cable lengths for a pose");
    ik->add_option("--config", config, "Bundled config name or config file")->required();
    ik->add_option("--pose", pose_text, "x,y,z,roll,pitch,yaw in mm and rad")->required();

    // solve-fk
    std::string solver = "opt";
    fk::FkOptSettings fk_settings;
    auto* fkc = app.add_subcommand("solve-fk", "Pose for a set of cable lengths");
    fkc->add_option("--config", config, "Bundled config name or config file")->required();
    fkc->add_option("--lengths", lengths_text, "Comma-separated cable lengths (mm)")->required();
    fkc->add_option("--solver", solver, "opt or cafknet")
        ->check(CLI::IsMember({"opt", "cafknet"}))
        ->capture_default_str();
    fkc->add_option("--model", model_path, "Checkpoint file (cafknet solver)");
    fkc->add_option("--max-iterations", fk_settings.max_iterations, "Optimization iteration limit")
        ->capture_default_str();
    fkc->add_option("--residual-tolerance", fk_settings.residual_tolerance, "Residual norm tolerance (mm)")
        ->capture_default_str();
    fkc->add_option("--step-tolerance", fk_settings.step_tolerance, "Relative step tolerance")
        ->capture_default_str();

    // transfer
    std::vector<std::string> sources;
    auto* transfer = app.add_subcommand("transfer", "Zero-shot evaluation of a trained model on another config");
    transfer->add_option("--model", model_path, "Checkpoint file")->required();
    transfer->add_option("--source", sources, "Configs the model was trained on")->required();
    transfer->add_option("--target", config, "Target config name or file")->required();
    transfer->add_option("--data", data_path, "Target dataset file")->required();
    transfer->add_option("--report", report_path, "Optional JSON report file");

    // sim2real
    std::string sim_path, clean_path, noise_path, method = "sim&real2real", model_out;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    ShapeFlags s2r_shape;
    TrainFlags s2r_train;
    auto* s2r = app.add_subcommand("sim2real", "Train with a sim2real data recipe and test on clean and noise data");
    s2r->add_option("--config", config, "Bundled config name or config file")->required();
    s2r->add_option("--sim", sim_path, "Simulated dataset")->required();
    s2r->add_option("--clean", clean_path, "Clean target-trajectory dataset")->required();
    s2r->add_option("--noise", noise_path, "Noise (measured) dataset")->required();
    s2r->add_option("--method", method, "sim2real, real2real or sim&real2real")
        ->check(CLI::IsMember({"sim2real", "real2real", "sim&real2real"}))
        ->capture_default_str();
    s2r->add_option("--train-fraction", train_fraction, "Fraction of clean data used for training")
        ->capture_default_str();
    s2r->add_option("--split-seed", split_seed, "Seed of the clean/noise split")->capture_default_str();
    s2r->add_option("--model-seed", model_seed, "Weight initialization seed")->capture_default_str();
    s2r_shape.add(s2r);
    s2r_train.add(s2r);
    s2r->add_option("--report", report_path, "Optional JSON file with both reports");
    s2r->add_option("--model-out", model_out, "Optional checkpoint file for the trained model");

    // bench
    std::size_t count = 100;
    int repeats = 5;
    auto* bench = app.add_subcommand("bench", "Time sequential FK solves over one trajectory");
    bench->add_option("--config", config, "Bundled config name or config file")->required();
    bench->add_option("--data", data_path, "Dataset file; the first --count samples are solved")
        ->required();
    bench->add_option("--count", count, "Number of FK problems")->capture_default_str();
    bench->add_option("--solver", solver, "opt, cafknet or both")
        ->check(CLI::IsMember({"opt", "cafknet", "both"}))
        ->capture_default_str();
    bench->add_option("--model", model_path, "Checkpoint file (cafknet solver)");
    bench->add_option("--repeats", repeats, "Timing repetitions; the median is reported")->capture_default_str();

    // export-config
    auto* export_cfg = app.add_subcommand("export-config", "Write a bundled config to a JSON config file");
    export_cfg->add_option("--config", config, "Bundled config name")->required();
    export_cfg->add_option("--out", out, "Output config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            const auto c = resolve_config(config);
            data::save_dataset(data::gen_dataset(c, trajectories, samples, seed), out);
            std::cout << "wrote " << trajectories * samples << " samples to " << out << '\n';

        } else if (*noise) {
            const auto c = resolve_config(config);
            const auto ds = data::inject_noise(c, data::load_dataset(data_path), sigma, seed);
            data::save_dataset(ds, out);
            std::cout << "wrote " << ds.size() << " noise-injected samples to " << out << '\n';

        } else if (*train) {
            if (configs.size() != datas.size())
                throw ValidationError("train: --config and --data must be given the same number of times");
            std::vector<CdprConfig> cfgs;
            std::vector<data::Dataset> sets;
            for (std::size_t k = 0; k < configs.size(); ++k) {
                cfgs.push_back(resolve_config(configs[k]));
                sets.push_back(data::load_dataset(datas[k]));
            }
            std::vector<exp::TrainSet> train_sets;
            for (std::size_t k = 0; k < cfgs.size(); ++k) train_sets.push_back({&cfgs[k], &sets[k]});

            exp::TrainResult result;
            if (model_type == "mlp") {
                if (cfgs.size() != 1) throw ValidationError("train: the mlp baseline supports a single config");
                nn::MlpBaseline<float> model(cfgs[0].cable_count(), mlp_layers, mlp_width, model_seed);
                result = exp::train(model, train_sets, train_flags.spec);
                nn::save_checkpoint(model, out);
            } else {
                std::vector<std::string> names;
                if (heads == "shared")
                    names = {"shared"};
                else
                    for (const auto& c : cfgs) names.push_back(c.name);
                nn::CafkNet<float> model(shape_flags.shape(), names, model_seed);
                result = exp::train(model, train_sets, train_flags.spec);
                nn::save_checkpoint(model, out);
            }
            print_curve(result, curve_path);
            if (!result.curve.empty())
                std::cout << "final training position RMSE " << data::format_number(result.curve.back().position_rmse)
                          << " mm\n";
            std::cout << "wrote model to " << out << '\n';

        } else if (*eval) {
            const auto c = resolve_config(config);
            const auto ds = data::load_dataset(data_path);
            const auto preds = with_model(model_path, [&](const auto& m) { return exp::predict(m, c, ds); });
            exp::EvalReport r{protocol, {{c.name, exp::rmse_position(preds, ds.poses()), ds.size(), 0.0}}};
            if (!report_path.empty()) report::save_json(r, report_path);
            if (!csv_path.empty()) report::save_csv(ds, preds, csv_path);
            if (!svg_path.empty()) report::save_svg(ds, preds, svg_trajectory, svg_path);
            std::cout << "rmse_mm=" << data::format_number(r.entries[0].rmse_mm) << '\n';

        } else if (*ik) {
            const auto c = resolve_config(config);
            const auto q = parse_list(pose_text, "--pose");
            if (q.size() != 6) throw ValidationError("--pose needs 6 values");
            const Pose p{q[0], q[1], q[2], q[3], q[4], q[5]};
            p.validate();
            const auto l = inverse_kinematics(c, p);
            std::cout << join(std::vector<double>(l.values().begin(), l.values().end())) << '\n';

        } else if (*fkc) {
            const auto c = resolve_config(config);
            const auto v = parse_list(lengths_text, "--lengths");
            const CableLengths l(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
            if (l.size() != c.cable_count())
                throw ConfigMismatch("--lengths has " + std::to_string(l.size()) + " values, config '" + c.name +
                                     "' has " + std::to_string(c.cable_count()) + " cables");
            if (solver == "opt") {
                auto s = fk::FkOptSettings::defaults_for(c);
                s.max_iterations = fk_settings.max_iterations;
                s.residual_tolerance = fk_settings.residual_tolerance;
                s.step_tolerance = fk_settings.step_tolerance;
                const auto sol = fk::solve_fk_opt(c, l, s);
                std::cout << pose_csv(sol.pose) << '\n'
                          << "residual_norm=" << data::format_number(sol.residual_norm) << '\n'
                          << "iterations=" << sol.iterations << '\n'
                          << "converged=" << (sol.converged ? "true" : "false") << '\n';
            } else {
                if (model_path.empty()) throw ValidationError("solve-fk: --model is required for --solver cafknet");
                const auto model = nn::load_checkpoint<float>(model_path);
                const auto* net = std::get_if<nn::CafkNet<float>>(&model);
                if (!net) throw ValidationError("solve-fk: --model is not a cafknet checkpoint");
                std::cout << pose_csv(net->predict(build_graph(c, l))) << '\n';
            }

        } else if (*transfer) {
            const auto c = resolve_config(config);
            const auto ds = data::load_dataset(data_path);
            const auto model = nn::load_checkpoint<float>(model_path);
            const auto* net = std::get_if<nn::CafkNet<float>>(&model);
            if (!net) throw ValidationError("transfer: only cafknet checkpoints run on other configurations");
            const auto r = exp::run_transfer(*net, sources, c, ds);
            if (!report_path.empty()) report::save_json(r, report_path);
            std::cout << "rmse_mm=" << data::format_number(r.entries[0].rmse_mm) << '\n';

        } else if (*s2r) {
            const auto c = resolve_config(config);
            exp::Sim2RealSpec spec;
            spec.shape = s2r_shape.shape();
            spec.train = s2r_train.spec;
            spec.model_seed = model_seed;
            spec.split_seed = split_seed;
            spec.train_fraction = train_fraction;
            const auto r = exp::run_sim2real(c, data::load_dataset(sim_path), data::load_dataset(clean_path),
                                             data::load_external(noise_path, c), exp::parse_method(method), spec);
            if (!report_path.empty()) {
                nlohmann::ordered_json j;
                j["clean"] = report::to_json(r.clean_test);
                j["noise"] = report::to_json(r.noise_test);
                write_text(report_path, j.dump(2) + "\n");
            }
            if (!model_out.empty()) nn::save_checkpoint(r.model, model_out);
            std::cout << "clean_rmse_mm=" << data::format_number(r.clean_test.entries[0].rmse_mm) << '\n'
                      << "noise_rmse_mm=" << data::format_number(r.noise_test.entries[0].rmse_mm) << '\n';

        } else if (*bench) {
            const auto c = resolve_config(config);
            const auto ds = data::load_dataset(data_path);
            data::check_matches(c, ds);
            const Eigen::MatrixXd all = ds.lengths_matrix();
            const Eigen::MatrixXd lengths = all.leftCols(std::min<Eigen::Index>(all.cols(), static_cast<Eigen::Index>(count)));
            if (repeats < 1) throw ValidationError("bench: --repeats must be positive");
            if (solver == "opt" || solver == "both")
                std::cout << "opt_seconds="
                          << exp::median_seconds([&] { return exp::bench_fk_opt(c, lengths); }, repeats) << '\n';
            if (solver == "cafknet" || solver == "both") {
                if (model_path.empty()) throw ValidationError("bench: --model is required for the cafknet solver");
                const auto model = nn::load_checkpoint<float>(model_path);
                const auto* net = std::get_if<nn::CafkNet<float>>(&model);
                if (!net) throw ValidationError("bench: --model is not a cafknet checkpoint");
                std::cout << "cafknet_seconds="
                          << exp::median_seconds([&] { return exp::bench_fk_cafknet(*net, c, lengths); }, repeats)
                          << '\n';
            }
            std::cout << "problems=" << lengths.cols() << '\n';

        } else if (*export_cfg) {
            save_config_file(bundled_config(config), out);
            std::cout << "wrote " << out << '\n';
        }
    } catch (const cafk::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
