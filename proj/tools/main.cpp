#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "refprice/experiment.hpp"

using namespace refprice;

int main(int argc, char** argv) {
    CLI::App app{"duopoly pricing dynamics under reference-price effects"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    long horizon_override = -1;
    bool quiet = false;

    const char* mode_names[] = {"simulate",     "simulate-induced", "best-response", "sne",
                                "const-region", "rate-constant",    "sweep"};
    for (const char* name : mode_names) {
        auto* sub = app.add_subcommand(name, std::string("run an experiment in ") + name + " mode");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--horizon", horizon_override, "override the config horizon");
        sub->add_flag("--quiet", quiet, "suppress report echo on stdout");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const std::string mode = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (to_string(cfg.mode) != mode) set_mode(cfg, mode_from_string(mode));
        if (horizon_override > 0 && cfg.mode != RunMode::simulate &&
            cfg.mode != RunMode::simulate_induced && cfg.mode != RunMode::best_response)
            horizon_override = -1; // horizon is meaningless for algebraic modes
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    RunOptions opts;
    opts.out_dir = out_dir;
    if (horizon_override > 0) opts.horizon_override = horizon_override;
    opts.quiet = quiet;
    return run(cfg, opts);
}
