// Experiment front end: run / shift / ablate drive the adaptation pipeline
// from a config file (flags override config keys); check executes the
// self-check property suite.

#include "ujmmd/checks.hpp"
#include "ujmmd/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

struct FlagValues {
    std::string config_path;
    std::string presets;
    long long seed = 0;
    int repeats = 1;
    std::string out_path;
    std::string format;
    double delta = 0.0;
    double lambda = 0.0;
    int dim = 0;
    int iters = 0;
    std::string kernel;
    double ridge = 0.0;
};

// Registers the shared experiment flags on one subcommand, bound to the
// given storage. CLI11 tracks which flags were actually passed.
void add_experiment_flags(CLI::App* cmd, FlagValues& values) {
    cmd->add_option("--config", values.config_path, "experiment config file (key = value)")
        ->required();
    cmd->add_option("--preset", values.presets,
                    "comma-separated preset names (KNN-baseline, PCA, M, M*, C, C*, WC, WC*, "
                    "WWC, WWC*)");
    cmd->add_option("--seed", values.seed, "base seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--repeats", values.repeats, "number of seeded repeats")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", values.out_path, "output file path");
    cmd->add_option("--format", values.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--delta", values.delta, "within-domain trade-off weight")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", values.lambda, "regularization weight")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dim", values.dim, "subspace dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--iters", values.iters, "pseudo-label refinement rounds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--kernel", values.kernel, "feature kernel family")
        ->check(CLI::IsMember({"linear", "rbf", "poly"}));
    cmd->add_option("--ridge", values.ridge, "ridge added to the constraint matrix")
        ->check(CLI::NonNegativeNumber);
}

ujmmd::ExperimentConfig config_from(const CLI::App* cmd, const FlagValues& v) {
    ujmmd::ExperimentConfig cfg = ujmmd::parse_config_file(v.config_path);
    if (cmd->count("--preset"))
        cfg.presets = ujmmd::detail::split_list(v.presets);
    if (cmd->count("--seed"))
        cfg.seed = static_cast<std::uint64_t>(v.seed);
    if (cmd->count("--repeats"))
        cfg.repeats = v.repeats;
    if (cmd->count("--out"))
        cfg.out_path = v.out_path;
    if (cmd->count("--format"))
        cfg.format = v.format;
    if (cmd->count("--delta"))
        cfg.method.delta = v.delta;
    if (cmd->count("--lambda"))
        cfg.method.lambda = v.lambda;
    if (cmd->count("--dim"))
        cfg.method.dim = v.dim;
    if (cmd->count("--iters"))
        cfg.method.iters = v.iters;
    if (cmd->count("--kernel"))
        cfg.method.kernel = v.kernel;
    if (cmd->count("--ridge"))
        cfg.method.ridge = v.ridge;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel-subspace domain adaptation experiments"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "standard adaptation runs per preset and seed");
    CLI::App* shift =
        app.add_subcommand("shift", "label-distribution-shift protocol (50% class drops)");
    CLI::App* ablate =
        app.add_subcommand("ablate", "ground-truth distance and dependence diagnostics");
    CLI::App* check = app.add_subcommand("check", "self-check property suite");

    FlagValues run_flags, shift_flags, ablate_flags;
    add_experiment_flags(run, run_flags);
    add_experiment_flags(shift, shift_flags);
    add_experiment_flags(ablate, ablate_flags);

    bool inject_mm_sign_error = false;
    check->add_flag("--inject-mm-sign-error", inject_mm_sign_error)->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ujmmd::cmd_run(config_from(run, run_flags), std::cout);
        } else if (shift->parsed()) {
            ujmmd::cmd_shift(config_from(shift, shift_flags), std::cout);
        } else if (ablate->parsed()) {
            ujmmd::cmd_ablate(config_from(ablate, ablate_flags), std::cout);
        } else if (check->parsed()) {
            ujmmd::CheckOptions options;
            options.inject_mm_sign_error = inject_mm_sign_error;
            return ujmmd::cmd_check(options, std::cout) == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
