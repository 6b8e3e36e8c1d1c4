// config.hpp - run configuration: JSON document, flag overrides, validation
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gklab/hopf.hpp"

namespace gklab {

struct Tolerances {
    double gk = 1e-7;            // verify_gk residuals
    double structural = 1e-10;   // soliton structural residual
    double tensor = 1e-6;        // metric/torsion equations and the Bismut identity
    double properties = 1e-7;    // properties of the soliton vector fields
    double scalar = 1e-9;        // e^{psi+} Pf(F+) = e^{psi-} Pf(F-)
    double watchdog = 1e-5;      // GK residual bound along flows
    double convexity = 1e-10;    // allowed negative second difference of J
    double nu = 1e-8;            // |nu| at a soliton, relative to sup |phi|
    double recovery = 1e-6;      // gradient descent distance to the start
    double fd = 1e-4;            // second variation vs finite differences of J, relative

    void set_all(double v) {
        gk = structural = tensor = properties = scalar = watchdog = convexity = nu = recovery = fd = v;
    }
};

struct ProfileConfig {
    std::string family = "tanh";  // "tanh": amplitude * tanh(t / scale); "csv": column p of `path`
    double amplitude = 0.9;
    double scale = 2.0;
    std::string path;
};

struct PotentialConfig {
    std::string family = "gaussian";  // gaussian | sech | zero | random
    double amplitude = 1.0;
    double width = 1.0;
    int index = 0;  // draw index for "random"
};

struct FlowConfig {
    PotentialConfig potential;
    double T = 0.05;   // flow time; rigidity: 0 selects 0.8 of the positivity horizon
    double dt = 1e-3;
    int record_every = 10;
    int check_every = 20;
};

struct FunctionalConfig {
    int potentials = 20;   // seeded random potentials tested at the soliton
    double eps = 4e-3;     // finite-difference step for the variational checks
};

struct RunConfig {
    std::string command;
    double alpha_abs = std::exp(-1.0);
    double beta_abs = std::exp(-1.0);
    GridSpec grid;
    bool t_max_set = false;
    Tolerances tol;
    ProfileConfig profile;
    FlowConfig flow;
    FunctionalConfig functional;
    std::uint64_t seed = 20240601;
    std::string out = "out";

    void validate() const;
    nlohmann::json to_json() const;
};

inline const std::set<std::string>& known_commands() {
    static const std::set<std::string> c{"verify", "solve", "flow", "rigidity", "functional"};
    return c;
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "uniform" || s == "uniform-central-4th") return Scheme::UniformCentral4;
    if (s == "chebyshev" || s == "chebyshev-mapped") return Scheme::ChebyshevMapped;
    throw ConfigError("unknown grid scheme '" + s + "' (expected uniform or chebyshev)");
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline void RunConfig::validate() const {
    if (!known_commands().count(command)) throw ConfigError("unknown command '" + command + "'");
    if (!(alpha_abs > 0.0 && alpha_abs < 1.0)) throw ConfigError("alpha_abs must lie in (0, 1)");
    if (!(beta_abs > 0.0 && beta_abs < 1.0)) throw ConfigError("beta_abs must lie in (0, 1)");
    if (!(alpha_abs <= beta_abs)) throw ConfigError("need alpha_abs <= beta_abs");
    if (!is_power_of_two(grid.n) || grid.n < 32 || grid.n > 65536)
        throw ConfigError("grid n must be a power of two between 32 and 65536, got " + std::to_string(grid.n));
    if (!(grid.t_max > 0.0) || !std::isfinite(grid.t_max)) throw ConfigError("t_max must be positive");
    if (profile.family != "tanh" && profile.family != "csv")
        throw ConfigError("profile family must be tanh or csv");
    if (profile.family == "tanh" && !(std::abs(profile.amplitude) < 1.0 && profile.scale > 0.0))
        throw ConfigError("tanh profile needs |amplitude| < 1 and scale > 0");
    if (profile.family == "csv" && profile.path.empty()) throw ConfigError("csv profile needs a path");
    static const std::set<std::string> fam{"gaussian", "sech", "zero", "random"};
    if (!fam.count(flow.potential.family))
        throw ConfigError("potential family must be gaussian, sech, zero or random");
    if (!(flow.potential.width > 0.0)) throw ConfigError("potential width must be positive");
    if (!(flow.dt > 0.0) || !std::isfinite(flow.dt)) throw ConfigError("flow dt must be positive");
    if (!(flow.T >= 0.0)) throw ConfigError("flow T must be >= 0");
    if (flow.record_every < 1 || flow.check_every < 1) throw ConfigError("record/check cadence must be >= 1");
    if (functional.potentials < 0) throw ConfigError("functional.potentials must be >= 0");
    if (!(functional.eps > 0.0)) throw ConfigError("functional.eps must be positive");
    if (out.empty()) throw ConfigError("output directory must not be empty");
}

inline nlohmann::json RunConfig::to_json() const {
    using nlohmann::json;
    return json{
        {"command", command},
        {"alpha_abs", alpha_abs},
        {"beta_abs", beta_abs},
        {"grid", {{"n", grid.n}, {"t_max", grid.t_max}, {"scheme", scheme_name(grid.scheme)},
                  {"map_scale", grid.map_scale}}},
        {"tolerances", {{"gk", tol.gk}, {"structural", tol.structural}, {"tensor", tol.tensor},
                        {"properties", tol.properties}, {"scalar", tol.scalar}, {"watchdog", tol.watchdog},
                        {"convexity", tol.convexity}, {"nu", tol.nu}, {"recovery", tol.recovery}, {"fd", tol.fd}}},
        {"profile", {{"family", profile.family}, {"amplitude", profile.amplitude}, {"scale", profile.scale},
                     {"path", profile.path}}},
        {"flow", {{"potential", {{"family", flow.potential.family}, {"amplitude", flow.potential.amplitude},
                                 {"width", flow.potential.width}, {"index", flow.potential.index}}},
                  {"T", flow.T}, {"dt", flow.dt}, {"record_every", flow.record_every},
                  {"check_every", flow.check_every}}},
        {"functional", {{"potentials", functional.potentials}, {"eps", functional.eps}}},
        {"seed", seed},
        {"out", out},
    };
}

namespace detail {

// Reads `key` from object `j` into `dst` if present, rejecting keys not listed.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const std::string& key, T& dst) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            dst = it->template get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const nlohmann::json* child(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace detail

// Applies a JSON document on top of `cfg`. Unknown keys are errors.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
    detail::ObjectReader r(j, "config");
    r.get("command", cfg.command);
    r.get("alpha_abs", cfg.alpha_abs);
    r.get("beta_abs", cfg.beta_abs);
    r.get("seed", cfg.seed);
    r.get("out", cfg.out);
    if (auto g = r.child("grid")) {
        detail::ObjectReader gr(*g, "config.grid");
        gr.get("n", cfg.grid.n);
        if (g->contains("t_max")) cfg.t_max_set = true;
        gr.get("t_max", cfg.grid.t_max);
        gr.get("map_scale", cfg.grid.map_scale);
        std::string scheme;
        gr.get("scheme", scheme);
        if (!scheme.empty()) cfg.grid.scheme = parse_scheme(scheme);
        gr.finish();
    }
    if (auto t = r.child("tolerances")) {
        detail::ObjectReader tr(*t, "config.tolerances");
        tr.get("gk", cfg.tol.gk);
        tr.get("structural", cfg.tol.structural);
        tr.get("tensor", cfg.tol.tensor);
        tr.get("properties", cfg.tol.properties);
        tr.get("scalar", cfg.tol.scalar);
        tr.get("watchdog", cfg.tol.watchdog);
        tr.get("convexity", cfg.tol.convexity);
        tr.get("nu", cfg.tol.nu);
        tr.get("recovery", cfg.tol.recovery);
        tr.get("fd", cfg.tol.fd);
        tr.finish();
    }
    if (auto p = r.child("profile")) {
        detail::ObjectReader pr(*p, "config.profile");
        pr.get("family", cfg.profile.family);
        pr.get("amplitude", cfg.profile.amplitude);
        pr.get("scale", cfg.profile.scale);
        pr.get("path", cfg.profile.path);
        pr.finish();
    }
    if (auto f = r.child("flow")) {
        detail::ObjectReader fr(*f, "config.flow");
        if (auto pot = fr.child("potential")) {
            detail::ObjectReader pr(*pot, "config.flow.potential");
            pr.get("family", cfg.flow.potential.family);
            pr.get("amplitude", cfg.flow.potential.amplitude);
            pr.get("width", cfg.flow.potential.width);
            pr.get("index", cfg.flow.potential.index);
            pr.finish();
        }
        fr.get("T", cfg.flow.T);
        fr.get("dt", cfg.flow.dt);
        fr.get("record_every", cfg.flow.record_every);
        fr.get("check_every", cfg.flow.check_every);
        fr.finish();
    }
    if (auto f = r.child("functional")) {
        detail::ObjectReader fr(*f, "config.functional");
        fr.get("potentials", cfg.functional.potentials);
        fr.get("eps", cfg.functional.eps);
        fr.finish();
    }
    r.finish();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// Default half-width of the grid for a command: verification runs on the wide
// interval, everything built on a soliton uses the soliton interval.
inline double default_t_max(const std::string& command, double soliton_t_max) {
    return command == "verify" ? 20.0 : soliton_t_max;
}

}  // namespace gklab
