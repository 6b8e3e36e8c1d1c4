// commands.hpp - the five CLI commands as library functions returning exit codes
#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "gklab/config.hpp"
#include "gklab/flow.hpp"
#include "gklab/io.hpp"

namespace gklab {

enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

inline constexpr const char* kToolVersion = "1.0.0";

struct CommandResult {
    int code = kExitOk;
    std::string message;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> outputs;  // file names relative to the output directory
};

// Tolerance class of each soliton verification entry.
inline double soliton_tolerance(const std::string& entry, const Tolerances& t) {
    if (entry == "structural") return t.structural;
    if (entry == "metric_equation" || entry == "torsion_equation" || entry == "bismut") return t.tensor;
    if (entry == "scalar_identity") return t.scalar;
    return t.properties;
}

namespace cmd_detail {

inline ScalarField load_profile(const RunConfig& cfg, const DomainPtr& dom) {
    if (cfg.profile.family == "tanh") return tanh_profile(dom, cfg.profile.amplitude, cfg.profile.scale);
    io::CsvData d;
    try {
        d = io::read_csv(cfg.profile.path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    }
    const int n = dom->grid.size();
    std::vector<double> p;
    try {
        p = d.column("p");
    } catch (const std::exception& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    }
    if (static_cast<int>(p.size()) != n)
        throw ConfigError("profile: " + std::to_string(p.size()) + " rows, grid has " + std::to_string(n));
    for (const auto& name : d.header) {
        if (name != "t") continue;
        const auto& t = d.column("t");
        for (int i = 0; i < n; ++i)
            if (std::abs(t[i] - dom->grid.t()[i]) > 1e-9 * std::max(1.0, std::abs(t[i])))
                throw ConfigError("profile: column t does not match the configured grid at row " +
                                  std::to_string(i + 2));
    }
    for (int i = 0; i < n; ++i)
        if (!(std::abs(p[i]) < 1.0))
            throw ConfigError("profile: p must lie in (-1, 1), row " + std::to_string(i + 2));
    return ScalarField(dom, std::move(p));
}

inline ScalarField potential(const RunConfig& cfg, const DomainPtr& dom) {
    const auto& pc = cfg.flow.potential;
    if (pc.family == "zero") return ScalarField(dom);
    if (pc.family == "sech") return tabulate(dom, [&](double t) { return pc.amplitude / std::cosh(t / pc.width); });
    if (pc.family == "random") return pc.amplitude * random_potential(dom, cfg.seed, pc.index);
    return gaussian_potential(dom, pc.amplitude, pc.width);
}

inline SolitonSolution solve(const RunConfig& cfg) {
    const HopfParams h = HopfParams::from_abs(cfg.alpha_abs, cfg.beta_abs);
    return solve_soliton(h, h.domain(cfg.grid));
}

inline int flow_steps(double T, double dt) {
    const int steps = static_cast<int>(std::lround(T / dt));
    if (std::abs(steps * dt - T) > 1e-9 * std::max(dt, T))
        throw ConfigError("flow: T = " + io::fmt17(T) + " is not a multiple of dt = " + io::fmt17(dt));
    return steps;
}

inline nlohmann::json report_json(const Report& r) { return r.to_json(); }

inline std::vector<double> numbers(const Report& r) {
    std::vector<double> v;
    for (const auto& e : r.entries) v.push_back(e.second);
    return v;
}

inline std::vector<std::string> names(const Report& r) {
    std::vector<std::string> v;
    for (const auto& e : r.entries) v.push_back(e.first);
    return v;
}

// One-row CSV with one column per report entry.
inline void write_report_csv(const std::filesystem::path& path, const Report& r) {
    std::vector<std::vector<double>> cols;
    for (double x : numbers(r)) cols.push_back({x});
    io::write_csv(path, names(r), cols);
}

}  // namespace cmd_detail

inline CommandResult cmd_verify(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path out = cfg.out;
    CommandResult res;
    const HopfParams h = HopfParams::from_abs(cfg.alpha_abs, cfg.beta_abs);
    const DomainPtr dom = h.domain(cfg.grid);
    const ScalarField p = cmd_detail::load_profile(cfg, dom);
    const GKState s = derive_state(h, p);
    Report r = verify_gk(s);
    for (const auto& e : verify_recovery(s).entries) r.entries.push_back(e);

    cmd_detail::write_report_csv(out / "residuals.csv", r);
    const StateTable tab = state_table(s, nullptr, nullptr);
    io::write_csv(out / "state.csv", tab.header, tab.columns);
    res.outputs = {"residuals.csv", "state.csv"};

    res.summary = {{"residuals", r.to_json()}, {"tolerance", cfg.tol.gk}, {"max", r.max()}};
    if (!r.all_below(cfg.tol.gk)) {
        res.code = kExitNumerical;
        for (const auto& [k, v] : r.entries)
            if (!(v < cfg.tol.gk)) res.message += k + " = " + io::fmt17(v) + " ";
        res.message = "tolerance breach: " + res.message;
    }
    return res;
}

inline CommandResult cmd_solve(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path out = cfg.out;
    CommandResult res;
    const SolitonSolution sol = cmd_detail::solve(cfg);
    const Report r = verify_soliton_full(sol);
    const GKState s = derive_state(sol.params, sol.p);
    const StateTable tab = state_table(s, &sol.f, &sol.psi);
    io::write_csv(out / "profile.csv", tab.header, tab.columns);
    std::vector<double> it, resid, step;
    for (const auto& rec : sol.trace) {
        it.push_back(rec.iter);
        resid.push_back(rec.residual);
        step.push_back(rec.step);
    }
    io::write_csv(out / "newton.csv", {"iter", "residual", "step"}, {it, resid, step});
    nlohmann::json failed = nlohmann::json::object();
    for (const auto& [k, v] : r.entries)
        if (!(v < soliton_tolerance(k, cfg.tol))) failed[k] = v;
    nlohmann::json sj = {
        {"params", sol.params},
        {"kappa_I", {sol.kappa_I(0), sol.kappa_I(1), sol.kappa_I(2)}},
        {"kappa_J", {sol.kappa_J(0), sol.kappa_J(1), sol.kappa_J(2)}},
        {"lambda_plus", sol.lambda_plus},
        {"lambda_minus", sol.lambda_minus},
        {"target_lambda_plus", target_lambda_plus(sol.params)},
        {"target_lambda_minus", target_lambda_minus(sol.params)},
        {"delta_plus", sol.delta_plus},
        {"delta_minus", sol.delta_minus},
        {"psi_constants", {sol.psi.c_plus, sol.psi.c_minus}},
        {"discrete_residual", sol.discrete_residual},
        {"newton_iterations", static_cast<int>(sol.trace.size())},
        {"verification", r.to_json()},
        {"failed", failed},
    };
    io::write_json(out / "soliton.json", sj);
    res.outputs = {"profile.csv", "newton.csv", "soliton.json"};
    res.summary = sj;
    std::fprintf(stderr, "solve: %d Newton iterations, %.2f s\n", static_cast<int>(sol.trace.size()), sol.seconds);
    if (!failed.empty()) {
        res.code = kExitNumerical;
        res.message = "soliton verification failed: " + failed.dump();
    }
    return res;
}

inline void write_flow_trace(const std::filesystem::path& path, const FlowPath& p) {
    std::vector<std::vector<double>> c(7);
    for (const auto& s : p.samples) {
        c[0].push_back(s.time);
        c[1].push_back(s.J);
        c[2].push_back(s.nu);
        c[3].push_back(s.second_variation);
        c[4].push_back(s.gk_residual);
        c[5].push_back(s.sigma_drift);
        c[6].push_back(s.F_plus_defect);
    }
    io::write_csv(path, {"time", "J", "nu", "second_variation", "gk_residual", "sigma_drift", "F_plus_defect"}, c);
}

inline CommandResult cmd_flow(const RunConfig& cfg) {
    const std::filesystem::path out = cfg.out;
    CommandResult res;
    const int steps = cmd_detail::flow_steps(cfg.flow.T, cfg.flow.dt);
    const SolitonSolution sol = cmd_detail::solve(cfg);
    const FlowBase base = make_flow_base(sol);
    const ScalarField phi = cmd_detail::potential(cfg, sol.dom);
    const double horizon =
        std::min(positivity_horizon(base.start, base.J, phi), positivity_horizon(base.start, base.J, -1.0 * phi));
    FlowOptions o;
    o.dt = cfg.flow.dt;
    o.record_every = cfg.flow.record_every;
    o.check_every = cfg.flow.check_every;
    o.watchdog = cfg.tol.watchdog;
    res.summary = {{"positivity_horizon", std::isfinite(horizon) ? nlohmann::json(horizon) : nlohmann::json()},
                   {"steps", steps}};
    FlowPath path;
    try {
        path = integrate_flow(base, [&](double) { return phi; }, steps, o);
    } catch (const WatchdogBreach& e) {
        res.code = kExitNumerical;
        res.message = e.what();
        io::write_json(out / "flow.json", res.summary);
        res.outputs = {"flow.json"};
        return res;
    }
    write_flow_trace(out / "trace.csv", path);
    res.summary["max_gk_residual"] = path.max_gk_residual;
    res.summary["max_sigma_drift"] = path.max_sigma_drift;
    res.summary["max_F_plus_defect"] = path.max_F_plus_defect;
    res.summary["J"] = path.final_J();
    io::write_json(out / "flow.json", res.summary);
    res.outputs = {"trace.csv", "flow.json"};
    std::fprintf(stderr, "flow: %d steps, %.2f s\n", path.steps, path.seconds);
    return res;
}

inline CommandResult cmd_rigidity(const RunConfig& cfg) {
    const std::filesystem::path out = cfg.out;
    CommandResult res;
    const SolitonSolution sol = cmd_detail::solve(cfg);
    const FlowBase base = make_flow_base(sol);
    const ScalarField phi = cmd_detail::potential(cfg, sol.dom);
    double T = cfg.flow.T;
    const double horizon =
        std::min(positivity_horizon(base.start, base.J, phi), positivity_horizon(base.start, base.J, -1.0 * phi));
    if (T == 0.0 && std::isfinite(horizon)) T = std::floor(0.8 * horizon / cfg.flow.dt) * cfg.flow.dt;
    cmd_detail::flow_steps(T, cfg.flow.dt);
    FlowOptions o;
    o.dt = cfg.flow.dt;
    o.check_every = cfg.flow.check_every;
    o.watchdog = cfg.tol.watchdog;
    RigidityReport rep;
    try {
        rep = rigidity_experiment(sol, phi, T, o, 10, cfg.tol.convexity, cfg.tol.recovery);
    } catch (const WatchdogBreach& e) {
        res.code = kExitNumerical;
        res.message = e.what();
        res.summary = {{"T", T}, {"positivity_horizon", horizon}, {"error", e.what()}};
        io::write_json(out / "rigidity.json", res.summary);
        res.outputs = {"rigidity.json"};
        return res;
    }
    io::write_csv(out / "rigidity.csv", {"time", "J", "nu", "second_variation"},
                  {rep.times, rep.J, rep.nu, rep.second_variation});
    io::write_csv(out / "structural.csv", {"time", "structural"}, {rep.structural_times, rep.structural});
    std::vector<double> iters;
    for (size_t k = 0; k < rep.descent_params.size(); ++k) iters.push_back(static_cast<double>(k));
    io::write_csv(out / "descent.csv", {"iter", "s"}, {iters, rep.descent_params});
    // Flowed states fail the soliton test when their structural residual is
    // above the tensor tolerance, well clear of the converged 1e-10 level.
    const bool not_solitons = rep.trivial || rep.min_structural_away > cfg.tol.tensor;
    res.summary = {{"T", T},
                   {"positivity_horizon", std::isfinite(horizon) ? nlohmann::json(horizon) : nlohmann::json()},
                   {"trivial", rep.trivial},
                   {"convex", rep.convex},
                   {"min_second_difference", rep.trivial ? 0.0 : rep.min_second_difference},
                   {"minimized_at_start", rep.minimized_at_start},
                   {"second_variation_nonnegative", rep.second_variation_nonnegative},
                   {"min_structural_away", rep.trivial ? 0.0 : rep.min_structural_away},
                   {"flowed_states_not_solitons", not_solitons},
                   {"recovered", rep.recovered},
                   {"recovered_distance", rep.recovered_distance},
                   {"descent_iterations", static_cast<int>(rep.descent_params.size()) - 1}};
    io::write_json(out / "rigidity.json", res.summary);
    res.outputs = {"rigidity.csv", "structural.csv", "descent.csv", "rigidity.json"};
    std::fprintf(stderr, "rigidity: T = %.4g, %.2f s\n", T, rep.seconds);
    if (!(rep.convex && rep.minimized_at_start && rep.second_variation_nonnegative && not_solitons && rep.recovered)) {
        res.code = kExitNumerical;
        res.message = "rigidity checks failed: " + res.summary.dump();
    }
    return res;
}

inline CommandResult cmd_functional(const RunConfig& cfg) {
    const std::filesystem::path out = cfg.out;
    CommandResult res;
    const SolitonSolution sol = cmd_detail::solve(cfg);
    const FlowBase base = make_flow_base(sol);
    const auto Fp = symplectic_form(base.start.g, base.start.I, base.J, +1.0);
    const auto Fm = symplectic_form(base.start.g, base.start.I, base.J, -1.0);
    const PsiPair psi = hamiltonian_potentials(Fp, Fm, base.X_plus, base.X_minus, base.reference_volume);

    std::vector<double> idx, nu, rel, sv, sup;
    bool ok = true;
    for (int k = 0; k < cfg.functional.potentials; ++k) {
        const ScalarField phi = random_potential(sol.dom, cfg.seed, k);
        idx.push_back(k);
        nu.push_back(nu_oneform(Fp, Fm, psi, phi));
        sup.push_back(phi.sup());
        rel.push_back(std::abs(nu.back()) / sup.back());
        sv.push_back(second_variation(base.start.g, base.start.I, base.J, Fp, Fm, psi, phi));
        ok = ok && rel.back() < cfg.tol.nu && sv.back() > 0.0;
    }
    io::write_csv(out / "functional.csv", {"index", "nu", "nu_relative", "second_variation", "sup_phi"},
                  {idx, nu, rel, sv, sup});

    const ScalarField phi = cmd_detail::potential(cfg, sol.dom);
    nlohmann::json fd = nullptr;
    if (phi.sup() > 0.0) {
        FlowOptions o;
        o.watchdog = cfg.tol.watchdog;
        o.check_every = 1 << 30;
        const VariationalCheck c = variational_check(base, phi, cfg.functional.eps, 8, o);
        fd = {{"eps", c.eps},
              {"t0", c.t0},
              {"dJ_error", {c.dJ_error[0], c.dJ_error[1]}},
              {"dJ_ratio", c.dJ_ratio},
              {"d2J", {c.d2J[0], c.d2J[1]}},
              {"second_variation", c.second_variation},
              {"relative", {c.relative[0], c.relative[1]}}};
        ok = ok && std::abs(c.dJ_ratio - 4.0) < 0.4 && c.relative[0] < cfg.tol.fd;
    }
    res.summary = {{"potentials", cfg.functional.potentials},
                   {"max_nu_relative", rel.empty() ? 0.0 : *std::max_element(rel.begin(), rel.end())},
                   {"min_second_variation", sv.empty() ? 0.0 : *std::min_element(sv.begin(), sv.end())},
                   {"finite_differences", fd}};
    io::write_json(out / "functional.json", res.summary);
    res.outputs = {"functional.csv", "functional.json"};
    if (!ok) {
        res.code = kExitNumerical;
        res.message = "functional checks failed: " + res.summary.dump();
    }
    return res;
}

// Runs cfg.command and writes manifest.json: the resolved configuration, its
// content hash, the outcome and a SHA-256 per output file.
inline CommandResult run_command(const RunConfig& cfg) {
    CommandResult res;
    try {
        cfg.validate();
        if (cfg.command == "verify") res = cmd_verify(cfg);
        else if (cfg.command == "solve") res = cmd_solve(cfg);
        else if (cfg.command == "flow") res = cmd_flow(cfg);
        else if (cfg.command == "rigidity") res = cmd_rigidity(cfg);
        else res = cmd_functional(cfg);
    } catch (const ConfigError& e) {
        res.code = kExitConfig;
        res.message = e.what();
    } catch (const std::invalid_argument& e) {
        res.code = kExitConfig;
        res.message = e.what();
    } catch (const std::exception& e) {
        res.code = kExitNumerical;
        res.message = e.what();
    }
    if (res.code == kExitConfig) return res;  // nothing trustworthy to record

    nlohmann::json files = nlohmann::json::object();
    for (const auto& name : res.outputs) {
        std::ifstream is(std::filesystem::path(cfg.out) / name, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        files[name] = io::sha256_hex(ss.str());
    }
    const nlohmann::json resolved = cfg.to_json();
    nlohmann::json manifest = {{"tool", "gklab"},
                               {"version", kToolVersion},
                               {"command", cfg.command},
                               {"config", resolved},
                               {"config_sha256", io::content_hash(resolved)},
                               {"seed", cfg.seed},
                               {"exit_code", res.code},
                               {"message", res.message},
                               {"outputs", files}};
    try {
        io::write_json(std::filesystem::path(cfg.out) / "manifest.json", manifest);
    } catch (const std::exception& e) {
        res.code = kExitConfig;
        res.message = e.what();
    }
    return res;
}

}  // namespace gklab
