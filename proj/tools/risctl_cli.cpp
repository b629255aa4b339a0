// Command-line entry point: train / eval / sweep / arr / render over a JSON
// experiment config.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "risctl/experiments/runner.hpp"

using namespace risctl;
using namespace risctl::experiments;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;

    ExperimentConfig load() const {
        ExperimentConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed)};
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required(config_required);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the config seed list");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-RIS activation and phase-control experiment runner"};
    app.require_subcommand(1);

    CommonArgs train_args, eval_args, sweep_args, arr_args;
    std::string render_dir;
    std::string sweep_axis = "power";
    std::string sweep_metric = "ar";

    CLI::App* cmd_train =
        app.add_subcommand("train", "train predictor and policy, write "
                                    "checkpoints and curves");
    add_common(cmd_train, train_args);

    CLI::App* cmd_eval = app.add_subcommand(
        "eval", "full run: train, evaluate policies, write decision logs and "
                "sweep tables");
    add_common(cmd_eval, eval_args);

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "metric sweep over one axis");
    add_common(cmd_sweep, sweep_args);
    cmd_sweep->add_option("--axis", sweep_axis, "power | elements")
        ->check(CLI::IsMember({"power", "elements"}));
    cmd_sweep->add_option("--metric", sweep_metric, "ar | sinr")
        ->check(CLI::IsMember({"ar", "sinr"}));

    CLI::App* cmd_arr = app.add_subcommand(
        "arr", "cross-interference generalization (ARR) matrix");
    add_common(cmd_arr, arr_args);

    CLI::App* cmd_render =
        app.add_subcommand("render", "render SVG charts from a run directory");
    cmd_render->add_option("--out", render_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            ExperimentConfig cfg = train_args.load();
            run_config(cfg, "", {}, /*include_sweeps=*/false);
            std::printf("trained; artifacts in %s\n", cfg.out_dir.c_str());
        } else if (cmd_eval->parsed()) {
            ExperimentConfig cfg = eval_args.load();
            run_config(cfg);
            std::printf("run complete; outputs in %s\n", cfg.out_dir.c_str());
        } else if (cmd_sweep->parsed()) {
            ExperimentConfig cfg = sweep_args.load();
            const SweepAxis axis = sweep_axis == "power" ? SweepAxis::power
                                                          : SweepAxis::elements;
            const SweepMetric metric =
                sweep_metric == "ar" ? SweepMetric::ar : SweepMetric::sinr;
            const SweepResult result =
                sweep(cfg, metric, axis, cfg.evaluation.policies);
            std::filesystem::create_directories(cfg.out_dir);
            const std::string stem = cfg.out_dir + "/sweep_" + sweep_axis;
            write_sweep_csv(stem + ".csv", cfg.hash,
                            sweep_axis == "power" ? "power_w" : "elements",
                            result);
            write_decision_csv(stem + "_decisions.csv", cfg.hash,
                               result.decisions);
            std::printf("sweep written to %s.csv\n", stem.c_str());
        } else if (cmd_arr->parsed()) {
            ExperimentConfig cfg = arr_args.load();
            const ArrResult result = arr_matrix(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            write_arr_csv(cfg.out_dir + "/arr_matrix.csv", cfg.hash, result);
            write_decision_csv(cfg.out_dir + "/arr_decisions.csv", cfg.hash,
                               result.decisions);
            std::printf("ARR matrix written to %s/arr_matrix.csv\n",
                        cfg.out_dir.c_str());
        } else if (cmd_render->parsed()) {
            emit_outputs(render_dir);
            std::printf("charts rendered in %s\n", render_dir.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
