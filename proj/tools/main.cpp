#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dlgp/dataio.hpp"
#include "dlgp/errors.hpp"
#include "dlgp/partition.hpp"
#include "dlgp/scenario.hpp"
#include "dlgp/selfcheck.hpp"

namespace {

struct CommonArgs {
    std::string data_path;
    std::string test_path;
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int checkpoints = 0;
    bool checkpoints_set = false;
    bool parallel = false;
};

dlgp::ExperimentConfig load_and_override(const CommonArgs& args) {
    auto cfg = dlgp::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.checkpoints_set) cfg.checkpoints = args.checkpoints;
    if (!args.out_path.empty()) cfg.report_path = args.out_path;
    cfg.validate();
    return cfg;
}

int write_report(const dlgp::ExperimentConfig& cfg, const auto& runner) {
    if (cfg.report_path.empty()) {
        runner(std::cout);
        return 0;
    }
    std::ofstream out(cfg.report_path);
    if (!out) {
        std::cerr << "error: cannot write " << cfg.report_path << "\n";
        return 1;
    }
    runner(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming regression with dividing local Gaussian processes"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* bench = app.add_subcommand(
        "bench", "Stream a training set and score a held-out test set at checkpoints");
    bench->add_option("--data", args.data_path, "training CSV")->required();
    bench->add_option("--test", args.test_path, "test CSV")->required();
    bench->add_option("--config", args.config_path, "experiment config JSON")->required();
    bench->add_option("--out", args.out_path, "report CSV path (default: stdout)");
    bench->add_option("--seed", args.seed, "override the config seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    bench->add_option("--checkpoints", args.checkpoints, "override the checkpoint count")
        ->each([&](const std::string&) { args.checkpoints_set = true; });
    bench->add_flag("--parallel", args.parallel, "one thread per target");

    auto* stream = app.add_subcommand(
        "stream", "Alternate single-point predictions and updates over a stream");
    stream->add_option("--data", args.data_path, "stream CSV")->required();
    stream->add_option("--config", args.config_path, "experiment config JSON")->required();
    stream->add_option("--out", args.out_path, "report CSV path (default: stdout)");
    stream->add_option("--seed", args.seed, "override the config seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    stream->add_flag("--parallel", args.parallel, "one thread per target");

    std::uint64_t verify_seed = 7;
    auto* verify = app.add_subcommand("verify", "Run the oracle and property suite");
    verify->add_option("--seed", verify_seed, "seed for the randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            const auto results = dlgp::run_selfcheck(verify_seed);
            bool all_passed = true;
            for (const auto& result : results) {
                std::cout << (result.passed ? "PASS" : "FAIL") << "  " << result.name << " — "
                          << result.detail << "\n";
                all_passed = all_passed && result.passed;
            }
            return all_passed ? 0 : 1;
        }

        const auto cfg = load_and_override(args);
        const dlgp::ScenarioOptions options{args.parallel};
        std::cerr << "run: seed=" << cfg.seed << " capacity=" << cfg.capacity
                  << " theta=" << cfg.theta << " strategy=" << dlgp::strategy_name(cfg.strategy)
                  << " targets=" << cfg.target_dim() << "\n";

        if (bench->parsed()) {
            const auto train =
                dlgp::load_csv(args.data_path, cfg.input_dim, cfg.target_dim());
            const auto test = dlgp::load_csv(args.test_path, cfg.input_dim, cfg.target_dim());
            return write_report(cfg, [&](std::ostream& out) {
                dlgp::run_checkpoint_scenario(train, test, cfg, &out, options);
            });
        }
        if (stream->parsed()) {
            const auto data = dlgp::load_csv(args.data_path, cfg.input_dim, cfg.target_dim());
            return write_report(cfg, [&](std::ostream& out) {
                dlgp::run_online_scenario(data, cfg, &out, options);
            });
        }
    } catch (const dlgp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
