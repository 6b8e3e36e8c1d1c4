// gklab - command-line front end: verify | solve | flow | rigidity | functional
//
// Exit codes: 0 success, 1 numerical or tolerance failure, 2 configuration failure.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gklab/commands.hpp"

int main(int argc, char** argv) {
    using namespace gklab;
    CLI::App app{"Generalized Kahler structures on diagonal Hopf surfaces"};
    app.set_version_flag("--version", std::string(kToolVersion));

    std::string command;
    std::string config_path;
    std::optional<double> alpha, beta, t_max, tol;
    std::optional<int> grid_n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    app.add_option("command", command, "verify | solve | flow | rigidity | functional")
        ->required()
        ->check(CLI::IsMember({"verify", "solve", "flow", "rigidity", "functional"}));
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--alpha", alpha, "|alpha| in (0, 1)");
    app.add_option("--beta", beta, "|beta| in (0, 1), at least |alpha|");
    app.add_option("--grid-n", grid_n, "grid size, a power of two in [32, 65536]");
    app.add_option("--t-max", t_max, "half-width of the t interval");
    app.add_option("--tol", tol, "override every residual tolerance of the command");
    app.add_option("--seed", seed, "seed for random test potentials");
    app.add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) apply_json(cfg, read_json_file(config_path));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "gklab: %s\n", e.what());
        return kExitConfig;
    }
    if (!cfg.command.empty() && cfg.command != command) {
        std::fprintf(stderr, "gklab: config names command '%s' but '%s' was requested\n", cfg.command.c_str(),
                     command.c_str());
        return kExitConfig;
    }
    cfg.command = command;
    if (alpha) cfg.alpha_abs = *alpha;
    if (beta) cfg.beta_abs = *beta;
    if (grid_n) cfg.grid.n = *grid_n;
    if (t_max) {
        cfg.grid.t_max = *t_max;
        cfg.t_max_set = true;
    }
    if (!cfg.t_max_set) cfg.grid.t_max = default_t_max(cfg.command, kSolitonTMax);
    if (tol) cfg.tol.set_all(*tol);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;

    const CommandResult res = run_command(cfg);
    if (res.code == kExitOk) {
        std::printf("%s: ok (%s)\n", cfg.command.c_str(), cfg.out.c_str());
    } else {
        std::fprintf(stderr, "gklab %s: %s\n", cfg.command.c_str(), res.message.c_str());
    }
    return res.code;
}
