// soliton.hpp - steady gradient GK-Ricci solitons of the Hopf family as a 1-D BVP
#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "gklab/hopf.hpp"

namespace gklab {

struct BoundaryConditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pointwise residual of X_I = k1 d/dy1 + k2 d/dy2 after clearing the factor
// -(1 - p^2)/2 from the y1 and y2 components of X_I = 1/2 I(theta_I# - grad f):
//   e1 = 2(p' + f'(1 - p)) + k1 (1 - p^2)
//   e2 = 2(b/a)(p' - f'(1 + p)) + k2 (1 - p^2)
// The x-components of X_I vanish identically on the family, and X_J is tied
// to X_I by k_J = (-k1, k2, 0).
struct StructuralEquations {
    double ba;  // b/a

    Eigen::Vector2d operator()(double p, double dp, double df, double k1, double k2) const {
        const double q = 1.0 - p * p;
        return {2.0 * (dp + df * (1.0 - p)) + k1 * q, 2.0 * ba * (dp - df * (1.0 + p)) + k2 * q};
    }
};

struct StructuralResidual {
    VectorField R_I, R_J;
    double sup() const { return std::max(R_I.interior_sup(), R_J.interior_sup()); }
};

inline Vec4 frame_combination(const HopfParams& h, const Eigen::Vector3d& k) {
    const auto fr = killing_frame(h);
    return k(0) * fr[0] + k(1) * fr[1] + k(2) * fr[2];
}

// R_I = 1/2 I(theta_I# - grad f) - sum kappa_I frame, and likewise for J.
inline StructuralResidual structural_residual(const HopfParams& h, const ScalarField& p,
                                              const ScalarField& f, const Eigen::Vector3d& kI,
                                              const Eigen::Vector3d& kJ) {
    require_same_domain(p.dom, f.dom);
    const GKState s = derive_state(h, p);
    const SolitonFields X = soliton_vector_fields(s, f);
    const Vec4 yI = frame_combination(h, kI), yJ = frame_combination(h, kJ);
    StructuralResidual r{X.X_I, X.X_J};
    for (auto& x : r.R_I.v) x -= yI;
    for (auto& x : r.R_J.v) x -= yJ;
    return r;
}

struct SolverOptions {
    int max_iter = 60;
    double tol = 1e-13;        // sup-norm of the discrete residual
    double armijo = 1e-4;
    double min_step = 1.0 / 1024;
    double fd_step = 1e-7;     // relative forward-difference step for the Jacobian
};

struct NewtonRecord {
    int iter;
    double residual;  // sup-norm before the step
    double step;      // accepted damping factor
};

struct SolitonSolution {
    HopfParams params;
    DomainPtr dom;
    ScalarField p, f;
    Eigen::Vector3d kappa_I = Eigen::Vector3d::Zero(), kappa_J = Eigen::Vector3d::Zero();
    PsiPair psi;
    double lambda_plus = 0.0, lambda_minus = 0.0;  // fitted tail rates
    double delta_plus = 0.0, delta_minus = 0.0;    // 1 - p(T), 1 + p(-T)
    double discrete_residual = 0.0;
    double structural = 0.0;
    std::vector<NewtonRecord> trace;
    double seconds = 0.0;
};

// Default half-width of soliton grids. Past |t| ~ 5 the factors 1 -+ p fall
// below 1e-3 and round-off in p, amplified by 1/(1 -+ p), dominates the residuals.
inline constexpr double kSolitonTMax = 5.0;

// Tail rates that make g11 ~ |z1|^2 and g22 ~ |z2|^2 near the two elliptic
// curves: 1 - p ~ e^{-t} as t -> +inf and 1 + p ~ e^{(a/b) t} as t -> -inf.
inline double target_lambda_plus(const HopfParams&) { return 1.0; }
inline double target_lambda_minus(const HopfParams& h) { return h.ratio(); }

// tanh of a profile whose slope interpolates between the two tail rates.
inline ScalarField default_soliton_guess(const HopfParams& h, const DomainPtr& dom) {
    const double lp = target_lambda_plus(h), lm = target_lambda_minus(h);
    return tabulate(dom, [&](double t) {
        const double s = ((lp + lm) * t + (lp - lm) * (std::sqrt(1.0 + t * t) - 1.0)) / 4.0;
        return std::tanh(s);
    });
}

namespace detail {

// Least-squares slope and intercept of y against x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const int m = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return {slope, (sy - slope * sx) / m};
}

class SolitonSystem {
public:
    SolitonSystem(const HopfParams& h, const DomainPtr& dom, const SolverOptions& opt)
        : h_(h), dom_(dom), opt_(opt), eq_{h.b / h.a}, n_(dom->grid.size()) {
        D_ = dom->grid.derivative_matrix();
        gauge_ = dom->grid.interpolation_weights(0.0);
    }

    int unknowns() const { return 2 * n_ + 2; }

    Eigen::VectorXd residual(const Eigen::VectorXd& u) const {
        const int n = n_;
        const Eigen::VectorXd p = u.head(n), f = u.segment(n, n);
        const Eigen::VectorXd dp = D_ * p, df = D_ * f;
        const double k1 = u(2 * n), k2 = u(2 * n + 1);
        Eigen::VectorXd R(unknowns());
        for (int i = 0; i < n - 1; ++i) {
            const Eigen::Vector2d e = eq_(p(i), dp(i), df(i), k1, k2);
            R(i) = e(0);
            R(n - 1 + i) = e(1);
        }
        double gp = 0.0, gf = 0.0;
        for (const auto& [j, w] : gauge_) {
            gp += w * p(j);
            gf += w * f(j);
        }
        R(2 * n - 2) = gp;
        R(2 * n - 1) = gf;
        R(2 * n) = k1 + target_lambda_plus(h_);
        R(2 * n + 1) = k2 + (h_.b / h_.a) * target_lambda_minus(h_);
        return R;
    }

    // Each collocation row depends on (p_i, (Dp)_i, (Df)_i, k1, k2) only, so
    // the Jacobian is the chain rule of forward-difference local partials with D.
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& u) const {
        const int n = n_;
        const Eigen::VectorXd p = u.head(n), f = u.segment(n, n);
        const Eigen::VectorXd dp = D_ * p, df = D_ * f;
        const double k1 = u(2 * n), k2 = u(2 * n + 1);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(D_.nonZeros()) * 4 + 8 * n);
        // d e / d(p, dp, df, k1, k2) per collocation row.
        std::vector<Eigen::Matrix<double, 2, 5>> parts(n);
        for (int i = 0; i < n - 1; ++i) {
            const double args[5] = {p(i), dp(i), df(i), k1, k2};
            const Eigen::Vector2d e0 = eq_(args[0], args[1], args[2], args[3], args[4]);
            for (int k = 0; k < 5; ++k) {
                double a[5] = {args[0], args[1], args[2], args[3], args[4]};
                const double step = opt_.fd_step * (1.0 + std::abs(a[k]));
                a[k] += step;
                parts[i].col(k) = (eq_(a[0], a[1], a[2], a[3], a[4]) - e0) / step;
            }
        }
        for (int k = 0; k < D_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(D_, k); it; ++it) {
                const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
                if (i >= n - 1) continue;
                for (int c = 0; c < 2; ++c) {
                    const int row = c * (n - 1) + i;
                    trip.emplace_back(row, j, parts[i](c, 1) * it.value());
                    trip.emplace_back(row, n + j, parts[i](c, 2) * it.value());
                }
            }
        for (int i = 0; i < n - 1; ++i)
            for (int c = 0; c < 2; ++c) {
                const int row = c * (n - 1) + i;
                trip.emplace_back(row, i, parts[i](c, 0));
                trip.emplace_back(row, 2 * n, parts[i](c, 3));
                trip.emplace_back(row, 2 * n + 1, parts[i](c, 4));
            }
        for (const auto& [j, w] : gauge_) {
            trip.emplace_back(2 * n - 2, j, w);
            trip.emplace_back(2 * n - 1, n + j, w);
        }
        trip.emplace_back(2 * n, 2 * n, 1.0);
        trip.emplace_back(2 * n + 1, 2 * n + 1, 1.0);
        Eigen::SparseMatrix<double> Jm(unknowns(), unknowns());
        Jm.setFromTriplets(trip.begin(), trip.end());
        Jm.makeCompressed();
        return Jm;
    }

private:
    HopfParams h_;
    DomainPtr dom_;
    SolverOptions opt_;
    StructuralEquations eq_;
    int n_;
    Eigen::SparseMatrix<double> D_;
    std::vector<std::pair<int, double>> gauge_;
};

inline bool feasible(const Eigen::VectorXd& u, int n) {
    for (int i = 0; i < n; ++i)
        if (!(std::abs(u(i)) < 1.0)) return false;
    return true;
}

inline Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                    bool dense) {
    if (dense) {
        const Eigen::MatrixXd Ad(A);
        return Ad.partialPivLu().solve(b);
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverFailure("soliton: singular Newton matrix");
    return lu.solve(b);
}

}  // namespace detail

// Fits the exponential tails 1 -+ p ~ delta e^{-+lambda (t -+ T)} in the outermost 10%.
inline void fit_tails(SolitonSolution& s) {
    const Grid& g = s.dom->grid;
    const int n = g.size();
    const int m = std::max(5, n / 10);
    std::vector<double> xl, yl, xr, yr;
    for (int i = 0; i < m; ++i) {
        xl.push_back(g.t(i));
        yl.push_back(std::log(1.0 + s.p.v[i]));
        xr.push_back(g.t(n - 1 - i));
        yr.push_back(std::log(1.0 - s.p.v[n - 1 - i]));
    }
    s.lambda_minus = detail::linear_fit(xl, yl).first;
    s.lambda_plus = -detail::linear_fit(xr, yr).first;
    s.delta_minus = 1.0 + s.p.v.front();
    s.delta_plus = 1.0 - s.p.v.back();
}

// Damped Newton on the square collocation system for (p, f, kappa_I).
inline SolitonSolution solve_soliton(const HopfParams& h, const ScalarField& p_init,
                                     const ScalarField* f_init = nullptr,
                                     const SolverOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    const DomainPtr dom = p_init.dom;
    const int n = dom->grid.size();
    if (!(p_init.v.front() < 0.0 && p_init.v.back() > 0.0))
        throw BoundaryConditionError(
            "solve_soliton: the initial profile must approach -1 at -T_max and +1 at +T_max "
            "(got p(-T) = " + std::to_string(p_init.v.front()) +
            ", p(T) = " + std::to_string(p_init.v.back()) + ")");
    for (double x : p_init.v)
        if (!(std::abs(x) < 1.0)) throw BoundaryConditionError("solve_soliton: initial |p| >= 1");

    detail::SolitonSystem sys(h, dom, opt);
    Eigen::VectorXd u(sys.unknowns());
    for (int i = 0; i < n; ++i) {
        u(i) = p_init.v[i];
        u(n + i) = f_init ? f_init->v[i] : 0.0;
    }
    u(2 * n) = -target_lambda_plus(h);
    u(2 * n + 1) = -(h.b / h.a) * target_lambda_minus(h);

    const bool dense = dom->grid.spec().scheme == Scheme::ChebyshevMapped;
    SolitonSolution sol;
    Eigen::VectorXd R = sys.residual(u);
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        const double rn = R.lpNorm<Eigen::Infinity>();
        if (rn < opt.tol) {
            converged = true;
            sol.trace.push_back({it, rn, 0.0});
            break;
        }
        const Eigen::VectorXd delta = detail::solve_linear(sys.jacobian(u), -R, dense);
        if (!delta.allFinite()) throw SolverFailure("soliton: Newton step is not finite");
        const double merit = R.squaredNorm();
        double lam = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial, Rt;
        while (lam >= opt.min_step) {
            trial = u + lam * delta;
            if (detail::feasible(trial, n)) {
                Rt = sys.residual(trial);
                if (Rt.squaredNorm() <= (1.0 - 2.0 * opt.armijo * lam) * merit) {
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        sol.trace.push_back({it, rn, accepted ? lam : 0.0});
        if (!accepted) {
            // Near round-off the merit can stall; accept convergence if the step is negligible.
            if (delta.lpNorm<Eigen::Infinity>() < 1e-12 && rn < 1e3 * opt.tol) {
                converged = true;
                break;
            }
            throw SolverFailure("soliton: line search failed at iteration " + std::to_string(it) +
                                " (residual " + std::to_string(rn) + ")");
        }
        u = trial;
        R = Rt;
    }
    if (!converged) {
        const double rn = R.lpNorm<Eigen::Infinity>();
        if (rn < opt.tol) converged = true;
        else
            throw SolverFailure("soliton: no convergence in " + std::to_string(opt.max_iter) +
                                " iterations (residual " + std::to_string(rn) + ")");
    }

    sol.params = h;
    sol.dom = dom;
    sol.p = ScalarField(dom);
    sol.f = ScalarField(dom);
    for (int i = 0; i < n; ++i) {
        sol.p.v[i] = u(i);
        sol.f.v[i] = u(n + i);
    }
    sol.kappa_I = Eigen::Vector3d(u(2 * n), u(2 * n + 1), 0.0);
    sol.kappa_J = Eigen::Vector3d(-u(2 * n), u(2 * n + 1), 0.0);
    sol.discrete_residual = R.lpNorm<Eigen::Infinity>();
    const GKState st = derive_state(h, sol.p);
    sol.psi = psi_pm(st, sol.f);
    sol.structural = structural_residual(h, sol.p, sol.f, sol.kappa_I, sol.kappa_J).sup();
    fit_tails(sol);
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

inline SolitonSolution solve_soliton(const HopfParams& h, const DomainPtr& dom,
                                     const SolverOptions& opt = {}) {
    return solve_soliton(h, default_soliton_guess(h, dom), nullptr, opt);
}

// ---------------------------------------------------------------------------
// Verification of the full soliton system

inline VectorField apply(const EndoField& A, const VectorField& X) {
    return zip(A, X, [](const Mat4& M, const Vec4& x) -> Vec4 { return M * x; });
}

// Rc - H^2/4 + Hess f: the metric part of the steady GKRS system.
inline EndoField soliton_metric_equation(const GKState& s, const ScalarField& f) {
    const EndoField Rc = ricci(s.g);
    const EndoField H2 = h_squared(s.g, s.H);
    const EndoField Hf = hessian(s.g, f);
    EndoField out(s.dom, "sym2");
    for (int i = 0; i < out.size(); ++i) out.v[i] = Rc.v[i] - 0.25 * H2.v[i] + Hf.v[i];
    return out;
}

// d*H + i_{grad f} H: the torsion part.
inline ReducedField<Form2> soliton_torsion_equation(const GKState& s, const ScalarField& f) {
    const auto dstar = codifferential(s.g, s.H);
    const auto iH = interior(gradient(s.g, f), s.H);
    return dstar + iH;
}

// rho_I^B = -1/2 d J dPhi with Phi = log(Pf(F+)/Pf(F-)).
inline ReducedField<Form2> bismut_ricci_form(const GKState& s) {
    ScalarField Phi(s.dom);
    for (int i = 0; i < Phi.size(); ++i)
        Phi.v[i] = std::log(top_density(s.F_plus.v[i]) / top_density(s.F_minus.v[i]));
    const auto JdPhi = act_on_form(s.J, exterior_d(Phi));
    return -0.5 * exterior_d(JdPhi);
}

inline ReducedField<Form2> part_11(const EndoField& I, const ReducedField<Form2>& b) {
    return zip(I, b, [](const Mat4& A, const Form2& x) { return 0.5 * (x + act_on_form(A, x)); });
}

inline Report verify_soliton_full(const SolitonSolution& sol) {
    Report r;
    const GKState s = derive_state(sol.params, sol.p);
    const DomainPtr& dom = s.dom;
    const ScalarField& f = sol.f;

    r.add("structural", structural_residual(sol.params, sol.p, f, sol.kappa_I, sol.kappa_J).sup());
    r.add("metric_equation", soliton_metric_equation(s, f).interior_sup());
    r.add("torsion_equation", soliton_torsion_equation(s, f).interior_sup());

    const SolitonFields X = soliton_vector_fields(s, f);
    const VectorField IXI = apply(s.I, X.X_I), JXJ = apply(s.J, X.X_J);
    r.add("bismut", (part_11(s.I, bismut_ricci_form(s)) + lie_derivative(IXI, s.omega_I)).interior_sup());

    // The properties of the soliton vector fields.
    r.add("L_IXI_sigma", lie_derivative(IXI, s.sigma).interior_sup());
    r.add("L_JXJ_sigma", lie_derivative(JXJ, s.sigma).interior_sup());
    r.add("L_XI_sigma", lie_derivative(X.X_I, s.sigma).interior_sup());
    r.add("L_XJ_sigma", lie_derivative(X.X_J, s.sigma).interior_sup());
    r.add("L_XI_J_plus_L_XJ_I",
          (lie_derivative(X.X_I, s.J) + lie_derivative(X.X_J, s.I)).interior_sup());
    r.add("holomorphic",
          std::max({lie_derivative(X.X_I, s.I).interior_sup(), lie_derivative(X.X_I, s.J).interior_sup(),
                    lie_derivative(X.X_J, s.I).interior_sup(), lie_derivative(X.X_J, s.J).interior_sup()}));
    r.add("killing", std::max(lie_derivative(X.X_I, s.g).interior_sup(),
                              lie_derivative(X.X_J, s.g).interior_sup()));
    r.add("bracket", lie_derivative(X.X_I, X.X_J).interior_sup());
    r.add("F_pm_XI_XJ", interior_sup_fn(dom, [&](int i) {
              const Vec4 &a = X.X_I.v[i], &b = X.X_J.v[i];
              return std::max(std::abs(a.dot(as_matrix(s.F_plus.v[i]) * b)),
                              std::abs(a.dot(as_matrix(s.F_minus.v[i]) * b)));
          }));
    r.add("sigma_inv_XI_XJ", interior_sup_fn(dom, [&](int i) {
              const Mat4 Om = as_matrix(sigma_inverse(s.sigma.v[i]));
              return std::max(std::abs(IXI.v[i].dot(Om * X.X_J.v[i])),
                              std::abs(X.X_I.v[i].dot(Om * JXJ.v[i])));
          }));

    // i_{X_I +- X_J} F_pm = -d psi_pm.
    const auto dpp = exterior_d(sol.psi.plus), dpm = exterior_d(sol.psi.minus);
    r.add("hamiltonian", interior_sup_fn(dom, [&](int i) {
              const Form1 a = interior(Vec4(X.X_I.v[i] + X.X_J.v[i]), s.F_plus.v[i]) + dpp.v[i];
              const Form1 b = interior(Vec4(X.X_I.v[i] - X.X_J.v[i]), s.F_minus.v[i]) + dpm.v[i];
              return std::max(a.max_abs(), b.max_abs());
          }));
    r.add("scalar_identity", interior_sup_fn(dom, [&](int i) {
              return std::exp(sol.psi.plus.v[i]) * top_density(s.F_plus.v[i]) -
                     std::exp(sol.psi.minus.v[i]) * top_density(s.F_minus.v[i]);
          }));
    // X_I + X_J along d/dy2 and X_I - X_J along d/dy1 only.
    const Eigen::Vector3d sum = sol.kappa_I + sol.kappa_J, diff = sol.kappa_I - sol.kappa_J;
    r.add("frame_direction", std::max({std::abs(sum(0)), std::abs(sum(2)), std::abs(diff(1)),
                                       std::abs(diff(2))}));
    return r;
}

}  // namespace gklab
