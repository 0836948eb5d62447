#include <string>

#include <CLI11.hpp>

#include "gebsde/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fully nonlinear PDE / ergodic BSDE toolkit under volatility uncertainty"};
    app.require_subcommand(1);

    std::string config_path;
    gebsde::CliOverrides ov;
    std::uint64_t seed_arg = 0;
    std::string out_arg;
    double grid_h_arg = 0.0, tol_arg = 0.0;

    for (const auto& name : gebsde::known_subcommands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (TOML-style blocks or JSON)")
            ->required();
        sub->add_option("--seed", seed_arg, "override the run seed");
        sub->add_option("--out", out_arg, "output directory");
        sub->add_option("--grid-h", grid_h_arg, "override the grid spacing");
        sub->add_option("--tol", tol_arg, "override the stage tolerance");
        sub->add_flag("--quiet", ov.quiet, "suppress progress output");
    }

    CLI11_PARSE(app, argc, argv);

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) ov.seed = seed_arg;
    if (sub->count("--out") > 0) ov.out_dir = out_arg;
    if (sub->count("--grid-h") > 0) ov.grid_h = grid_h_arg;
    if (sub->count("--tol") > 0) ov.tol = tol_arg;

    return gebsde::run_subcommand(sub->get_name(), config_path, ov);
}
