// flow.hpp - Hamiltonian flow construction, the 1-form nu, the J-functional and rigidity
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gklab/soliton.hpp"

namespace gklab {

struct WatchdogBreach : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Poisson geometry of sigma

// X_phi = -sigma(d phi, .).
inline VectorField hamiltonian_vf(const ReducedField<Bivector>& sigma, const ScalarField& phi) {
    return zip(sigma, exterior_d(phi),
               [](const Bivector& s, const Form1& d) -> Vec4 { return -s.contract_first(as_vec(d)); });
}

// {phi1, phi2} = sigma(d phi1, d phi2).
inline ScalarField poisson_bracket(const ReducedField<Bivector>& sigma, const ScalarField& phi1,
                                   const ScalarField& phi2) {
    const auto d1 = exterior_d(phi1), d2 = exterior_d(phi2);
    ScalarField out(sigma.dom);
    for (int i = 0; i < out.size(); ++i) out.v[i] = sigma.v[i](as_vec(d1.v[i]), as_vec(d2.v[i]));
    return out;
}

inline ReducedField<Bivector> poisson_tensor(const EndoField& g, const EndoField& I, const EndoField& J) {
    ReducedField<Bivector> s(g.dom);
    for (int i = 0; i < s.size(); ++i)
        s.v[i] = Bivector::from_first_slot_map(0.5 * commutator(I.v[i], J.v[i]) * g.v[i].inverse());
    return s;
}

// ---------------------------------------------------------------------------
// Flow construction: dg/ds = (dd^c_I phi J)^sym, dI/ds = L_{X_phi} I, dJ/ds = 0.
//
// sigma is constant along the flow, so X_phi is built from the initial sigma.
// Rebuilding it from the current (I, g) couples I' and g' into a system that
// is ill-posed in s and blows up within a few dozen steps.

struct FlowFields {
    EndoField I, g;
};

inline FlowFields flow_rhs(const FlowFields& y, const EndoField& J, const ReducedField<Bivector>& sigma,
                           const ScalarField& phi) {
    const VectorField X = hamiltonian_vf(sigma, phi);
    const auto ddc = exterior_d(d_c(y.I, phi));
    FlowFields d{lie_derivative(X, y.I), EndoField(y.g.dom, "sym2")};
    for (int i = 0; i < d.g.size(); ++i)
        d.g.v[i] = sym_part(J.v[i].transpose() * as_matrix(ddc.v[i]));
    return d;
}

inline FlowFields axpy(const FlowFields& y, double h, const FlowFields& k) {
    return {y.I + h * k.I, y.g + h * k.g};
}

// Nearest complex structure for I, symmetric part for g.
inline void project(FlowFields& y) {
    for (auto& A : y.I.v) A = project_complex_structure(A);
    for (auto& G : y.g.v) G = sym_part(G);
}

// The metric moves along g_0 + s (dd^c phi J)^sym for a fixed potential, so
// the flow stays Riemannian exactly for s below the smallest 1/lambda over
// the positive generalized eigenvalues lambda of (-G, g_0). Returns +inf when
// no such eigenvalue exists.
inline double positivity_horizon(const FlowFields& y, const EndoField& J, const ScalarField& phi) {
    const auto ddc = exterior_d(d_c(y.I, phi));
    double lam = 0.0;
    for (int i = 0; i < y.g.size(); ++i) {
        const Mat4 G = sym_part(J.v[i].transpose() * as_matrix(ddc.v[i]));
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> es(-G, y.g.v[i]);
        lam = std::max(lam, es.eigenvalues().maxCoeff());
    }
    return lam > 0.0 ? 1.0 / lam : INFINITY;
}

// One classical RK4 step of length dt for a potential frozen over the step.
inline FlowFields flow_step(const FlowFields& y, const EndoField& J, const ReducedField<Bivector>& sigma,
                            const ScalarField& phi, double dt, bool projection = true) {
    const FlowFields k1 = flow_rhs(y, J, sigma, phi);
    const FlowFields k2 = flow_rhs(axpy(y, dt / 2, k1), J, sigma, phi);
    const FlowFields k3 = flow_rhs(axpy(y, dt / 2, k2), J, sigma, phi);
    const FlowFields k4 = flow_rhs(axpy(y, dt, k3), J, sigma, phi);
    FlowFields out = y;
    for (int i = 0; i < y.I.size(); ++i) {
        out.I.v[i] += dt / 6 * (k1.I.v[i] + 2 * k2.I.v[i] + 2 * k3.I.v[i] + k4.I.v[i]);
        out.g.v[i] += dt / 6 * (k1.g.v[i] + 2 * k2.g.v[i] + 2 * k3.g.v[i] + k4.g.v[i]);
    }
    if (projection) project(out);
    return out;
}

// ---------------------------------------------------------------------------
// Weighted volumes and the 1-form nu

inline ReducedField<Form2> symplectic_form(const EndoField& g, const EndoField& I, const EndoField& J,
                                           double sign) {
    ReducedField<Form2> F(g.dom);
    for (int i = 0; i < F.size(); ++i) {
        const Mat4 P = I.v[i] + sign * J.v[i];
        F.v[i] = as_form2((-2.0 * P.inverse()).transpose() * g.v[i]);
    }
    return F;
}

// Potentials of the F_pm-Hamiltonian fields X_pm, i_{X_pm} F_pm = -d psi_pm,
// normalized to integrate_M(e^{psi_pm} Pf(F_pm)) = V. Since psi depends on t
// only, psi' = -(i_X F . c)/(c . c); `defect` receives the part of i_X F that
// is not a multiple of dt (zero exactly when X_pm is Hamiltonian).
inline PsiPair hamiltonian_potentials(const ReducedField<Form2>& Fp, const ReducedField<Form2>& Fm,
                                      const VectorField& Xp, const VectorField& Xm, double V,
                                      double* defect = nullptr) {
    const DomainPtr& dom = Fp.dom;
    const Vec4 c = dom->frame.c;
    const double cc = c.squaredNorm();
    double worst = 0.0;
    auto potential = [&](const ReducedField<Form2>& F, const VectorField& X) {
        std::vector<double> dpsi(F.size());
        for (int i = 0; i < F.size(); ++i) {
            const Vec4 iXF = as_vec(interior(X.v[i], F.v[i]));
            dpsi[i] = -iXF.dot(c) / cc;
            if (i >= dom->grid.interior_begin() && i < dom->grid.interior_end())
                worst = std::max(worst, (iXF + dpsi[i] * c).cwiseAbs().maxCoeff());
        }
        return ScalarField(dom, dom->grid.antiderivative(dpsi, 0.0));
    };
    PsiPair out;
    out.reference_volume = V;
    out.plus = potential(Fp, Xp);
    out.minus = potential(Fm, Xm);
    auto normalize = [&](ScalarField& psi, const ReducedField<Form2>& F) {
        const double mass = integrate_M(weighted_density(psi, F));
        if (!(mass > 0.0)) throw std::runtime_error("hamiltonian_potentials: weighted volume <= 0");
        const double k = std::log(V / mass);
        for (double& x : psi.v) x += k;
        return k;
    };
    out.c_plus = normalize(out.plus, Fp);
    out.c_minus = normalize(out.minus, Fm);
    if (defect) *defect = worst;
    return out;
}

// nu(phi) = integrate_M(phi (e^{psi+} Pf(F+) - e^{psi-} Pf(F-))).
inline double nu_oneform(const ReducedField<Form2>& Fp, const ReducedField<Form2>& Fm,
                         const PsiPair& psi, const ScalarField& phi) {
    ScalarField dens(phi.dom);
    for (int i = 0; i < dens.size(); ++i)
        dens.v[i] = phi.v[i] * (std::exp(psi.plus.v[i]) * top_density(Fp.v[i]) -
                                std::exp(psi.minus.v[i]) * top_density(Fm.v[i]));
    return integrate_M(dens);
}

inline double nu_oneform(const GKState& s, const PsiPair& psi, const ScalarField& phi) {
    return nu_oneform(s.F_plus, s.F_minus, psi, phi);
}

// 1/4 integrate_M(|(I+J)d phi|^2 e^{psi+} Pf(F+)) + 1/4 integrate_M(|(I-J)d phi|^2 e^{psi-} Pf(F-)).
inline double second_variation(const EndoField& g, const EndoField& I, const EndoField& J,
                               const ReducedField<Form2>& Fp, const ReducedField<Form2>& Fm,
                               const PsiPair& psi, const ScalarField& phi) {
    const auto dphi = exterior_d(phi);
    ScalarField dens(phi.dom);
    for (int i = 0; i < dens.size(); ++i) {
        const Mat4 ginv = g.v[i].inverse();
        const double np = form_norm2(ginv, act_linear(I.v[i] + J.v[i], dphi.v[i]));
        const double nm = form_norm2(ginv, act_linear(I.v[i] - J.v[i], dphi.v[i]));
        dens.v[i] = 0.25 * (np * std::exp(psi.plus.v[i]) * top_density(Fp.v[i]) +
                            nm * std::exp(psi.minus.v[i]) * top_density(Fm.v[i]));
    }
    return integrate_M(dens);
}

inline double second_variation(const GKState& s, const PsiPair& psi, const ScalarField& phi) {
    return second_variation(s.g, s.I, s.J, s.F_plus, s.F_minus, psi, phi);
}

// ---------------------------------------------------------------------------
// Paths

// Data held fixed along a path: J, the generating fields X_I +- X_J of the base
// point and the reference volume of the weighted measures.
struct FlowBase {
    HopfParams params;
    EndoField J;
    VectorField X_plus, X_minus;
    double reference_volume = 0.0;
    FlowFields start;
    ReducedField<Bivector> sigma0;
};

inline FlowBase make_flow_base(const GKState& s, const SolitonFields& X, double V = 0.0) {
    FlowBase b;
    b.params = s.params;
    b.J = s.J;
    b.X_plus = X.X_I + X.X_J;
    b.X_minus = X.X_I - X.X_J;
    b.reference_volume = V > 0.0 ? V : volume(s);
    b.start = {s.I, s.g};
    b.sigma0 = s.sigma;
    return b;
}

inline FlowBase make_flow_base(const SolitonSolution& sol) {
    const GKState s = derive_state(sol.params, sol.p);
    return make_flow_base(s, soliton_vector_fields(s, sol.f));
}

struct FlowOptions {
    double dt = 1e-3;
    int record_every = 1;       // keep every k-th state in the path
    int check_every = 20;       // GK watchdog cadence in steps (the final state is always checked)
    double watchdog = 1e-5;
    bool projection = true;
    bool functional = true;     // accumulate J, nu and the second variation
};

struct FlowSample {
    double time = 0.0;
    double J = 0.0;
    double nu = 0.0;
    double second_variation = 0.0;
    double gk_residual = std::numeric_limits<double>::quiet_NaN();  // NaN where not checked
    double sigma_drift = 0.0;
    double F_plus_defect = 0.0;
    double psi_defect = 0.0;
};

struct FlowPath {
    std::vector<FlowSample> samples;
    std::vector<FlowFields> states;      // recorded states, aligned with `recorded`
    std::vector<int> recorded;           // sample index of each recorded state
    std::vector<ScalarField> potentials; // phi at each recorded state
    int steps = 0;
    double seconds = 0.0;
    double max_gk_residual = 0.0;
    double max_sigma_drift = 0.0;
    double max_F_plus_defect = 0.0;

    double final_J() const { return samples.empty() ? 0.0 : samples.back().J; }
};

// Integrates the flow for `steps` steps of size opts.dt with potential phi(s).
// J is accumulated by Simpson's rule on every step, with the midpoint state
// from an RK4 half step, so it carries the integrator's order.
inline FlowPath integrate_flow(const FlowBase& base, const std::function<ScalarField(double)>& phi_of,
                               int steps, const FlowOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (steps < 0) throw std::invalid_argument("integrate_flow: negative step count");
    const double dt = opts.dt;
    FlowPath path;
    FlowFields y = base.start;
    const ReducedField<Form2> Fp0 = symplectic_form(y.g, y.I, base.J, +1.0);
    ReducedField<Form2> ddc_integral(y.g.dom);  // int_0^s dd^c_{I_u} phi_u du

    auto nu_at = [&](const FlowFields& st, const ScalarField& phi, double* sv, double* defect) {
        const auto Fp = symplectic_form(st.g, st.I, base.J, +1.0);
        const auto Fm = symplectic_form(st.g, st.I, base.J, -1.0);
        const PsiPair psi =
            hamiltonian_potentials(Fp, Fm, base.X_plus, base.X_minus, base.reference_volume, defect);
        if (sv) *sv = second_variation(st.g, st.I, base.J, Fp, Fm, psi, phi);
        return nu_oneform(Fp, Fm, psi, phi);
    };
    auto ddc_of = [&](const FlowFields& st, const ScalarField& phi) {
        return exterior_d(d_c(st.I, phi));
    };
    auto check = [&](const FlowFields& st) {
        const GKState s = derive(base.params, st.g, st.I, base.J);
        return verify_gk_axioms(s).max();
    };
    auto record = [&](const FlowFields& st, const ScalarField& phi) {
        path.states.push_back(st);
        path.recorded.push_back(static_cast<int>(path.samples.size()) - 1);
        path.potentials.push_back(phi);
    };

    FlowSample s0;
    ScalarField phi = phi_of(0.0);
    if (opts.functional) s0.nu = nu_at(y, phi, &s0.second_variation, &s0.psi_defect);
    s0.gk_residual = check(y);
    path.samples.push_back(s0);
    record(y, phi);
    path.max_gk_residual = s0.gk_residual;

    for (int k = 0; k < steps; ++k) {
        const double t0 = k * dt;
        const ScalarField ph0 = phi_of(t0), phm = phi_of(t0 + dt / 2), ph1 = phi_of(t0 + dt);
        // RK4 with the potential sampled at the stage times.
        const FlowFields k1 = flow_rhs(y, base.J, base.sigma0, ph0);
        const FlowFields k2 = flow_rhs(axpy(y, dt / 2, k1), base.J, base.sigma0, phm);
        const FlowFields k3 = flow_rhs(axpy(y, dt / 2, k2), base.J, base.sigma0, phm);
        const FlowFields k4 = flow_rhs(axpy(y, dt, k3), base.J, base.sigma0, ph1);
        FlowFields next = y;
        for (int i = 0; i < y.I.size(); ++i) {
            next.I.v[i] += dt / 6 * (k1.I.v[i] + 2 * k2.I.v[i] + 2 * k3.I.v[i] + k4.I.v[i]);
            next.g.v[i] += dt / 6 * (k1.g.v[i] + 2 * k2.g.v[i] + 2 * k3.g.v[i] + k4.g.v[i]);
        }
        if (opts.projection) project(next);
        for (int i = 0; i < next.g.size(); ++i) {
            Eigen::LLT<Mat4> llt(next.g.v[i]);
            if (llt.info() != Eigen::Success)
                throw WatchdogBreach("flow: metric lost positivity at time " + std::to_string(t0 + dt) +
                                     ", t = " + std::to_string(next.g.grid().t()[i]));
        }

        // Midpoint state by an RK4 half step, for Simpson's rule.
        FlowFields mid = y;
        {
            const double h = dt / 2;
            const ScalarField phq = phi_of(t0 + h / 2);
            const FlowFields m2 = flow_rhs(axpy(y, h / 2, k1), base.J, base.sigma0, phq);
            const FlowFields m3 = flow_rhs(axpy(y, h / 2, m2), base.J, base.sigma0, phq);
            const FlowFields m4 = flow_rhs(axpy(y, h, m3), base.J, base.sigma0, phm);
            for (int i = 0; i < y.I.size(); ++i) {
                mid.I.v[i] += h / 6 * (k1.I.v[i] + 2 * m2.I.v[i] + 2 * m3.I.v[i] + m4.I.v[i]);
                mid.g.v[i] += h / 6 * (k1.g.v[i] + 2 * m2.g.v[i] + 2 * m3.g.v[i] + m4.g.v[i]);
            }
            if (opts.projection) project(mid);
        }

        const auto q0 = ddc_of(y, ph0), qm = ddc_of(mid, phm), q1 = ddc_of(next, ph1);
        for (int i = 0; i < ddc_integral.size(); ++i)
            ddc_integral.v[i] += dt / 6 * (q0.v[i] + 4.0 * qm.v[i] + q1.v[i]);

        FlowSample s;
        s.time = t0 + dt;
        if (opts.functional) {
            const double nu0 = path.samples.back().nu;
            const double num = nu_at(mid, phm, nullptr, nullptr);
            s.nu = nu_at(next, ph1, &s.second_variation, &s.psi_defect);
            s.J = path.samples.back().J + dt / 6 * (nu0 + 4 * num + s.nu);
        }
        const auto sig = poisson_tensor(next.g, next.I, base.J);
        for (int i = sig.grid().interior_begin(); i < sig.grid().interior_end(); ++i)
            s.sigma_drift = std::max(s.sigma_drift, (sig.v[i].c - base.sigma0.v[i].c).cwiseAbs().maxCoeff());
        const auto Fp = symplectic_form(next.g, next.I, base.J, +1.0);
        for (int i = Fp.grid().interior_begin(); i < Fp.grid().interior_end(); ++i)
            s.F_plus_defect = std::max(s.F_plus_defect, (Fp.v[i] - Fp0.v[i] + ddc_integral.v[i]).max_abs());
        const bool last = k + 1 == steps;
        if ((k + 1) % std::max(1, opts.check_every) == 0 || last) {
            s.gk_residual = check(next);
            path.max_gk_residual = std::max(path.max_gk_residual, s.gk_residual);
            if (!(s.gk_residual < opts.watchdog))
                throw WatchdogBreach("flow: GK residual " + std::to_string(s.gk_residual) +
                                     " exceeds the watchdog " + std::to_string(opts.watchdog) +
                                     " at time " + std::to_string(s.time));
        }
        path.max_sigma_drift = std::max(path.max_sigma_drift, s.sigma_drift);
        path.max_F_plus_defect = std::max(path.max_F_plus_defect, s.F_plus_defect);
        path.samples.push_back(s);
        y = std::move(next);
        if ((k + 1) % std::max(1, opts.record_every) == 0 || last) record(y, ph1);
        path.steps = k + 1;
    }
    path.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return path;
}

inline FlowPath integrate_flow(const FlowBase& base, const ScalarField& phi, double T,
                               const FlowOptions& opts = {}) {
    const int steps = static_cast<int>(std::lround(T / opts.dt));
    if (std::abs(steps * opts.dt - T) > 1e-12 * std::max(1.0, T))
        throw std::invalid_argument("integrate_flow: T must be a multiple of dt");
    return integrate_flow(base, [&](double) { return phi; }, steps, opts);
}

// J along a path, by its final accumulated value.
inline double j_functional(const FlowPath& path) { return path.final_J(); }

inline ScalarField sech_potential(const DomainPtr& dom, double amplitude = 1.0) {
    return tabulate(dom, [&](double t) { return amplitude / std::cosh(t); });
}

inline ScalarField gaussian_potential(const DomainPtr& dom, double amplitude = 1.0, double width = 1.0) {
    return tabulate(dom, [&](double t) { return amplitude * std::exp(-(t * t) / (width * width)); });
}

// Sum of three Gaussian bumps with centers in [-2, 2], widths in [0.5, 1.5]
// and coefficients in [-1, 1], drawn from mt19937_64(seed) skipped to draw
// `index`. Uniform variates are built from raw engine bits so the potentials
// do not depend on the standard library's distribution implementations.
inline ScalarField random_potential(const DomainPtr& dom, std::uint64_t seed, int index) {
    std::mt19937_64 rng(seed);
    rng.discard(static_cast<unsigned long long>(index) * 9);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
    double center[3], width[3], coef[3];
    for (int k = 0; k < 3; ++k) {
        center[k] = uniform(-2.0, 2.0);
        width[k] = uniform(0.5, 1.5);
        coef[k] = uniform(-1.0, 1.0);
    }
    return tabulate(dom, [&](double t) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += coef[k] * std::exp(-std::pow((t - center[k]) / width[k], 2));
        return s;
    });
}

// ---------------------------------------------------------------------------
// Finite-difference checks of nu and the second variation against J

struct VariationalCheck {
    double eps = 0.0;
    double t0 = 0.0;                 // point where nu is compared with dJ/dt
    double dJ_error[2] = {0, 0};     // central dJ/dt - nu(t0) at eps and eps/2
    double dJ_ratio = 0.0;
    double d2J[2] = {0, 0};          // central d^2J/dt^2 at 0, steps eps and eps/2
    double second_variation = 0.0;   // at the base state
    double relative[2] = {0, 0};     // |d2J - second_variation| / second_variation
};

// Flows the base state by +-phi with step eps/substeps (substeps even), so
// that eps and eps/2 are multiples of the step; nu is compared at t0 = 2 eps.
inline VariationalCheck variational_check(const FlowBase& base, const ScalarField& phi, double eps,
                                          int substeps = 8, const FlowOptions& opts_in = {}) {
    if (substeps < 2 || substeps % 2) throw std::invalid_argument("variational_check: substeps must be even");
    FlowOptions opts = opts_in;
    opts.dt = eps / substeps;
    opts.functional = true;
    const ScalarField neg = -1.0 * phi;
    const FlowPath fwd = integrate_flow(base, [&](double) { return phi; }, 3 * substeps, opts);
    const FlowPath bwd = integrate_flow(base, [&](double) { return neg; }, substeps, opts);
    auto J = [&](int k) { return k >= 0 ? fwd.samples[k].J : bwd.samples[-k].J; };
    VariationalCheck c;
    c.eps = eps;
    c.t0 = 2 * eps;
    c.second_variation = fwd.samples[0].second_variation;
    const int k0 = 2 * substeps;
    for (int m = 0; m < 2; ++m) {
        const int e = substeps >> m;
        const double h = e * opts.dt;
        c.dJ_error[m] = (J(k0 + e) - J(k0 - e)) / (2 * h) - fwd.samples[k0].nu;
        c.d2J[m] = (J(e) + J(-e) - 2 * J(0)) / (h * h);
        c.relative[m] = std::abs(c.d2J[m] - c.second_variation) / std::abs(c.second_variation);
    }
    c.dJ_ratio = c.dJ_error[0] / c.dJ_error[1];
    return c;
}

// ---------------------------------------------------------------------------
// Rigidity experiment

struct RigidityReport {
    std::vector<double> times, J, nu, second_variation;  // every step on [-T, T]
    std::vector<double> structural_times, structural;   // recorded states only
    double min_second_difference = 0.0;
    int argmin = 0;
    bool convex = false, minimized_at_start = false, second_variation_nonnegative = false;
    double min_structural_away = 0.0;  // over t != 0
    std::vector<double> descent_params;
    double recovered_distance = 0.0;   // sup |I_s - I_0| at the end of the descent
    bool recovered = false;
    bool trivial = false;
    double seconds = 0.0;
};

// Residual of X_I - kappa_I frame and X_J - kappa_J frame on an arbitrary state.
inline double structural_residual_state(const GKState& s, const ScalarField& f, const Eigen::Vector3d& kI,
                                        const Eigen::Vector3d& kJ) {
    const SolitonFields X = soliton_vector_fields(s, f);
    const Vec4 yI = frame_combination(s.params, kI), yJ = frame_combination(s.params, kJ);
    return interior_sup_fn(s.dom, [&](int i) {
        return std::max((X.X_I.v[i] - yI).cwiseAbs().maxCoeff(), (X.X_J.v[i] - yJ).cwiseAbs().maxCoeff());
    });
}

// Runs the constant-speed flow for times in [-T, T], checks convexity of J,
// that J is minimal at the soliton, that flowed states are not solitons, and
// that gradient descent along the path returns to the soliton.
inline RigidityReport rigidity_experiment(const SolitonSolution& sol, const ScalarField& phi, double T,
                                          const FlowOptions& opts_in = {}, int samples_per_side = 10,
                                          double convexity_tol = 1e-10, double recover_tol = 1e-6) {
    const auto start = std::chrono::steady_clock::now();
    RigidityReport rep;
    const FlowBase base = make_flow_base(sol);
    const GKState s0 = derive(sol.params, base.start.g, base.start.I, base.J);
    const double base_structural = structural_residual_state(s0, sol.f, sol.kappa_I, sol.kappa_J);
    const bool zero = phi.sup() == 0.0;
    if (zero || T == 0.0) {
        rep.trivial = true;
        rep.times = {0.0};
        rep.J = {0.0};
        rep.nu = {0.0};
        rep.second_variation = {0.0};
        rep.structural_times = {0.0};
        rep.structural = {base_structural};
        rep.convex = rep.minimized_at_start = rep.second_variation_nonnegative = rep.recovered = true;
        return rep;
    }
    FlowOptions opts = opts_in;
    const int steps = static_cast<int>(std::lround(T / opts.dt));
    opts.record_every = std::max(1, steps / samples_per_side);
    const ScalarField neg = -1.0 * phi;
    const FlowPath fwd = integrate_flow(base, [&](double) { return phi; }, steps, opts);
    const FlowPath bwd = integrate_flow(base, [&](double) { return neg; }, steps, opts);

    // J, nu and the second variation at every step (uniform spacing for the
    // second differences); structural residuals at the recorded states. The
    // backward path runs in reversed time, so J(-s) = J_bwd(s) and nu flips sign.
    for (int k = static_cast<int>(bwd.samples.size()) - 1; k >= 1; --k) {
        const FlowSample& smp = bwd.samples[k];
        rep.times.push_back(-smp.time);
        rep.J.push_back(smp.J);
        rep.nu.push_back(-smp.nu);
        rep.second_variation.push_back(smp.second_variation);
    }
    for (const FlowSample& smp : fwd.samples) {
        rep.times.push_back(smp.time);
        rep.J.push_back(smp.J);
        rep.nu.push_back(smp.nu);
        rep.second_variation.push_back(smp.second_variation);
    }
    auto add_structural = [&](const FlowPath& path, int k, double sign) {
        const FlowFields& st = path.states[k];
        const GKState s = derive(sol.params, st.g, st.I, base.J);
        rep.structural_times.push_back(sign * path.samples[path.recorded[k]].time);
        rep.structural.push_back(structural_residual_state(s, sol.f, sol.kappa_I, sol.kappa_J));
    };
    for (int k = static_cast<int>(bwd.recorded.size()) - 1; k >= 1; --k) add_structural(bwd, k, -1.0);
    for (int k = 0; k < static_cast<int>(fwd.recorded.size()); ++k) add_structural(fwd, k, 1.0);
    const int m = static_cast<int>(rep.J.size());
    rep.min_second_difference = INFINITY;
    for (int i = 1; i + 1 < m; ++i)
        rep.min_second_difference = std::min(rep.min_second_difference, rep.J[i - 1] - 2 * rep.J[i] + rep.J[i + 1]);
    rep.convex = rep.min_second_difference >= -convexity_tol;
    rep.argmin = static_cast<int>(std::min_element(rep.J.begin(), rep.J.end()) - rep.J.begin());
    rep.minimized_at_start = rep.times[rep.argmin] == 0.0;
    rep.second_variation_nonnegative =
        *std::min_element(rep.second_variation.begin(), rep.second_variation.end()) >= 0.0;
    rep.min_structural_away = INFINITY;
    for (size_t i = 0; i < rep.structural.size(); ++i)
        if (rep.structural_times[i] != 0.0)
            rep.min_structural_away = std::min(rep.min_structural_away, rep.structural[i]);

    // Gradient descent on the path parameter: s <- s - nu(s)/J''(0).
    const double curvature = fwd.samples.front().second_variation;
    FlowOptions quiet = opts;
    quiet.functional = false;
    quiet.check_every = 1 << 30;
    auto state_at = [&](double s) {
        const int n_steps = s == 0.0 ? 0 : std::max(1, static_cast<int>(std::lround(std::abs(s) / opts.dt)));
        FlowOptions o = quiet;
        if (n_steps > 0) o.dt = std::abs(s) / n_steps;
        const ScalarField& dir = s >= 0 ? phi : neg;
        const FlowPath p = integrate_flow(base, [&](double) { return dir; }, n_steps, o);
        return p.states.back();
    };
    auto nu_param = [&](const FlowFields& st) {
        const auto Fp = symplectic_form(st.g, st.I, base.J, +1.0);
        const auto Fm = symplectic_form(st.g, st.I, base.J, -1.0);
        const PsiPair psi = hamiltonian_potentials(Fp, Fm, base.X_plus, base.X_minus, base.reference_volume);
        return nu_oneform(Fp, Fm, psi, phi);
    };
    double s = T;
    rep.descent_params.push_back(s);
    for (int it = 0; it < 40; ++it) {
        const double g = nu_param(state_at(s));
        const double next = s - g / curvature;
        rep.descent_params.push_back(next);
        if (std::abs(next - s) < 1e-12) {
            s = next;
            break;
        }
        s = next;
    }
    const FlowFields end = state_at(s);
    rep.recovered_distance = 0.0;
    for (int i = 0; i < end.I.size(); ++i)
        rep.recovered_distance =
            std::max(rep.recovered_distance, (end.I.v[i] - base.start.I.v[i]).cwiseAbs().maxCoeff());
    rep.recovered = rep.recovered_distance < recover_tol;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace gklab
