// hopf.hpp - the generalized Kähler family (g, I, J) on a diagonal Hopf surface
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gklab/calculus.hpp"
#include "gklab/parallel.hpp"

namespace gklab {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when I + J or I - J is singular where it must be invertible.
struct LogDegenerate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Surface (C^2 \ 0) / <(z1, z2) -> (alpha z1, beta z2)>.
struct HopfParams {
    double a = -1.0;  // log|alpha|
    double b = -1.0;  // log|beta|

    // 0 < |alpha| <= |beta| < 1. The classical definition is sometimes
    // misprinted as 1 < |alpha| <= |beta| < 1, which admits nothing.
    static HopfParams from_abs(double alpha_abs, double beta_abs) {
        if (!(alpha_abs > 0.0 && alpha_abs < 1.0 && beta_abs > 0.0 && beta_abs < 1.0))
            throw ConfigError("Hopf parameters need 0 < |alpha| <= |beta| < 1 (the bound "
                              "'1 < |alpha|' seen in some statements is a misprint); got |alpha| = " +
                              std::to_string(alpha_abs) + ", |beta| = " + std::to_string(beta_abs));
        if (alpha_abs > beta_abs)
            throw ConfigError("Hopf parameters need |alpha| <= |beta|; got |alpha| = " +
                              std::to_string(alpha_abs) + " > |beta| = " + std::to_string(beta_abs));
        return from_ab(std::log(alpha_abs), std::log(beta_abs));
    }
    static HopfParams from_ab(double a, double b) {
        if (!(a <= b && b < 0.0))
            throw ConfigError("Hopf parameters need a <= b < 0 for a = log|alpha|, b = log|beta|");
        return HopfParams{a, b};
    }

    double ratio() const { return a / b; }  // r = a/b >= 1
    double alpha_abs() const { return std::exp(a); }
    double beta_abs() const { return std::exp(b); }
    double c_deck() const { return 2.0 * std::numbers::pi * std::numbers::pi * std::abs(a); }
    DomainPtr domain(GridSpec spec) const { return make_domain(spec, a, b); }
};

inline void to_json(nlohmann::json& j, const HopfParams& h) {
    j = {{"alpha_abs", h.alpha_abs()}, {"beta_abs", h.beta_abs()}, {"a", h.a}, {"b", h.b}};
}

// Angle profile p(t) in (-1, 1), optionally with a soliton potential candidate f(t).
struct Profile {
    ScalarField p;
    ScalarField f;  // empty dom means "not set"

    bool has_f() const { return static_cast<bool>(f.dom); }
};

inline ScalarField tanh_profile(const DomainPtr& dom, double amplitude, double scale) {
    return tabulate(dom, [&](double t) { return amplitude * std::tanh(t / scale); });
}

// ---------------------------------------------------------------------------
// Pointwise constructors

inline Endo4 standard_I() {
    Endo4 I = Endo4::Zero();
    I(1, 0) = 1.0;
    I(0, 1) = -1.0;
    I(3, 2) = 1.0;
    I(2, 3) = -1.0;
    return I;
}

// J is the complex structure whose (1,0)-forms are spanned by
//   eta1 = dw1 - (a/b) dbar w2,   eta2 = (b(1+p)/2a) dbar w1 + ((1-p)/2) dw2,
// i.e. eta o J = -i eta for both. Built as Re(E^{-1} D E) from the row basis.
inline Endo4 build_J_point(const HopfParams& h, double p) {
    if (!(std::abs(p) < 1.0))
        throw LogDegenerate("build_J: the (1,0)-forms degenerate at |p| >= 1 (p = " +
                            std::to_string(p) + ")");
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    const double r = h.a / h.b;
    const CVec4 w1 = dw1(), w2 = dw2();
    const CVec4 eta1 = w1 - r * w2.conjugate();
    const CVec4 eta2 = (h.b * (1.0 + p) / (2.0 * h.a)) * w1.conjugate() + (0.5 * (1.0 - p)) * w2;
    CMat4 E;
    E.row(0) = eta1.transpose();
    E.row(1) = eta2.transpose();
    E.row(2) = eta1.conjugate().transpose();
    E.row(3) = eta2.conjugate().transpose();
    Eigen::PartialPivLU<CMat4> lu(E);
    if (!(std::abs(lu.determinant()) > 1e-14))
        throw LogDegenerate("build_J: (1,0)-forms and their conjugates fail to span");
    CMat4 D = CMat4::Zero();
    D(0, 0) = D(1, 1) = -i;
    D(2, 2) = D(3, 3) = i;
    const CMat4 Jc = lu.solve(D * E);
    return Jc.real();
}

inline Metric4 build_metric_point(const HopfParams& h, double p) {
    const double g11 = h.b * (1.0 + p) / (2.0 * h.a);
    const double g22 = h.a * (1.0 - p) / (2.0 * h.b);
    if (!(g11 > 0.0 && g22 > 0.0))
        throw DegenerateMetric("build_metric: non-positive coefficient at p = " + std::to_string(p));
    return Vec4(g11, g11, g22, g22).asDiagonal();
}

// Lee form: the unique theta with d(omega) = theta ^ omega (4-D, omega nondegenerate).
inline Form1 lee_form_point(const Form3& domega, const Form2& omega) {
    static constexpr int rows[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    Mat4 A;
    Vec4 rhs;
    for (int k = 0; k < 4; ++k) {
        for (int m = 0; m < 4; ++m) {
            const Form3 w = wedge(basis1(m), omega);
            A(k, m) = w(rows[k][0], rows[k][1], rows[k][2]);
        }
        rhs(k) = domega(rows[k][0], rows[k][1], rows[k][2]);
    }
    Eigen::FullPivLU<Mat4> lu(A);
    if (!lu.isInvertible()) throw std::runtime_error("lee_form: omega is degenerate");
    return as_form(lu.solve(rhs));
}

// ---------------------------------------------------------------------------
// Fields

inline EndoField build_I(const DomainPtr& dom) {
    EndoField I(dom, "endo");
    for (auto& x : I.v) x = standard_I();
    return I;
}

inline EndoField build_J(const HopfParams& h, const ScalarField& p) {
    EndoField J(p.dom, "endo");
    parallel_for(p.size(), [&](int i) { J.v[i] = build_J_point(h, p.v[i]); });
    return J;
}

inline EndoField build_metric(const HopfParams& h, const ScalarField& p) {
    EndoField g(p.dom, "sym2");
    for (int i = 0; i < p.size(); ++i) g.v[i] = build_metric_point(h, p.v[i]);
    return g;
}

inline ReducedField<Form1> lee_form(const ReducedField<Form2>& omega) {
    const auto domega = exterior_d(omega);
    return zip(domega, omega, [](const Form3& d, const Form2& w) { return lee_form_point(d, w); });
}

// Every tensor derived from a GK triple (g, I, J).
struct GKState {
    HopfParams params;
    DomainPtr dom;
    EndoField g, I, J;
    ReducedField<Form2> omega_I, omega_J, F_plus, F_minus;
    ReducedField<Form3> H;
    ReducedField<Form1> theta_I, theta_J;
    ReducedField<Bivector> sigma, sigma_I_re, sigma_I_im;
    ScalarField det_plus, det_minus, angle;

    const Grid& grid() const { return dom->grid; }
};

// Populates every cached tensor from (g, I, J). Throws LogDegenerate when
// I + J or I - J is singular at an interior sample.
inline GKState derive(const HopfParams& h, EndoField g, EndoField I, EndoField J) {
    require_same_domain(g.dom, I.dom);
    require_same_domain(g.dom, J.dom);
    GKState s;
    s.params = h;
    s.dom = g.dom;
    const int n = g.size();
    s.omega_I = ReducedField<Form2>(s.dom);
    s.omega_J = ReducedField<Form2>(s.dom);
    s.F_plus = ReducedField<Form2>(s.dom);
    s.F_minus = ReducedField<Form2>(s.dom);
    s.sigma = ReducedField<Bivector>(s.dom);
    s.sigma_I_re = ReducedField<Bivector>(s.dom);
    s.sigma_I_im = ReducedField<Bivector>(s.dom);
    s.det_plus = ScalarField(s.dom);
    s.det_minus = ScalarField(s.dom);
    s.angle = ScalarField(s.dom);
    const Grid& grid = s.dom->grid;
    parallel_for(n, [&](int i) {
        const Mat4& G = g.v[i];
        const Mat4& A = I.v[i];
        const Mat4& B = J.v[i];
        s.omega_I.v[i] = form_from_endo(A, G);
        s.omega_J.v[i] = form_from_endo(B, G);
        const Mat4 S = 0.5 * commutator(A, B) * G.inverse();
        s.sigma.v[i] = Bivector::from_first_slot_map(S);
        // sigma_I = sigma - i I sigma, with I acting on the first slot.
        s.sigma_I_re.v[i] = s.sigma.v[i];
        s.sigma_I_im.v[i] = Bivector::from_first_slot_map(-(A * S));
        const Mat4 P = A + B, M = A - B;
        s.det_plus.v[i] = P.determinant();
        s.det_minus.v[i] = M.determinant();
        s.angle.v[i] = angle(A, B);
        const bool interior = i >= grid.interior_begin() && i < grid.interior_end();
        if (!(s.det_plus.v[i] > 0.0) || !(s.det_minus.v[i] > 0.0)) {
            if (interior)
                throw LogDegenerate("derive: I +- J singular at t = " + std::to_string(grid.t(i)));
            return;
        }
        s.F_plus.v[i] = as_form2((-2.0 * P.inverse()).transpose() * G);
        s.F_minus.v[i] = as_form2((-2.0 * M.inverse()).transpose() * G);
    });
    s.g = std::move(g);
    s.I = std::move(I);
    s.J = std::move(J);
    s.H = d_c(s.I, s.omega_I);
    s.theta_I = lee_form(s.omega_I);
    s.theta_J = lee_form(s.omega_J);
    return s;
}

inline GKState derive_state(const HopfParams& h, const ScalarField& p) {
    return derive(h, build_metric(h, p), build_I(p.dom), build_J(h, p));
}

// ---------------------------------------------------------------------------
// Potentials and soliton vector fields

inline ScalarField volume_form_density(const GKState& s) { return volume_density(s.g); }

inline double volume(const GKState& s) { return integrate_M(volume_form_density(s)); }

struct PsiPair {
    ScalarField plus, minus;
    double c_plus = 0.0, c_minus = 0.0;  // added normalization constants
    double reference_volume = 0.0;
};

// psi_pm = 1/2 log det(I +- J) - f + c_pm with c_pm chosen so that
// integrate_M(e^{psi_pm} Pf(F_pm)) equals the reference volume (default Vol(M, g)).
inline PsiPair psi_pm(const GKState& s, const ScalarField& f, double reference_volume = 0.0) {
    require_same_domain(s.dom, f.dom);
    PsiPair out;
    out.reference_volume = reference_volume > 0.0 ? reference_volume : volume(s);
    auto raw = [&](const ScalarField& det) {
        ScalarField r(s.dom);
        for (int i = 0; i < r.size(); ++i) {
            if (!(det.v[i] > 0.0)) throw LogDegenerate("psi_pm: nonpositive det(I +- J)");
            r.v[i] = 0.5 * std::log(det.v[i]) - f.v[i];
        }
        return r;
    };
    out.plus = raw(s.det_plus);
    out.minus = raw(s.det_minus);
    auto normalize = [&](ScalarField& psi, const ReducedField<Form2>& F) {
        const ScalarField dens = zip(psi, F, [](double x, const Form2& w) {
            return std::exp(x) * top_density(w);
        });
        const double mass = integrate_M(dens);
        if (!(mass > 0.0)) throw std::runtime_error("psi_pm: weighted volume is not positive");
        const double c = std::log(out.reference_volume / mass);
        for (double& x : psi.v) x += c;
        return c;
    };
    out.c_plus = normalize(out.plus, s.F_plus);
    out.c_minus = normalize(out.minus, s.F_minus);
    return out;
}

// e^{psi} Pf(F): the weighted volume densities.
inline ScalarField weighted_density(const ScalarField& psi, const ReducedField<Form2>& F) {
    return zip(psi, F, [](double x, const Form2& w) { return std::exp(x) * top_density(w); });
}

inline VectorField gradient(const EndoField& g, const ScalarField& f) {
    return zip(g, exterior_d(f), [](const Mat4& G, const Form1& df) { return sharp(G, df); });
}

inline VectorField sharp(const EndoField& g, const ReducedField<Form1>& a) {
    return zip(g, a, [](const Mat4& G, const Form1& x) { return sharp(G, x); });
}

struct SolitonFields {
    VectorField X_I, X_J;
};

// X_I = 1/2 I(theta_I# - grad f), X_J = 1/2 J(theta_J# - grad f).
inline SolitonFields soliton_vector_fields(const GKState& s, const ScalarField& f) {
    const VectorField gf = gradient(s.g, f);
    const VectorField tI = sharp(s.g, s.theta_I), tJ = sharp(s.g, s.theta_J);
    SolitonFields out{VectorField(s.dom), VectorField(s.dom)};
    for (int i = 0; i < f.size(); ++i) {
        out.X_I.v[i] = 0.5 * s.I.v[i] * (tI.v[i] - gf.v[i]);
        out.X_J.v[i] = 0.5 * s.J.v[i] * (tJ.v[i] - gf.v[i]);
    }
    return out;
}

// Killing frame of the torus K: d/dy1, d/dy2 and a d/dx1 + b d/dx2.
inline std::array<Vec4, 3> killing_frame(const HopfParams& h) {
    return {Vec4(0, 1, 0, 0), Vec4(0, 0, 0, 1), Vec4(h.a, 0, h.b, 0)};
}

// Coefficients of X in the Killing frame, by least squares per sample.
inline Eigen::Vector3d frame_coefficients(const HopfParams& h, const Vec4& X) {
    const auto fr = killing_frame(h);
    Eigen::Matrix<double, 4, 3> B;
    for (int k = 0; k < 3; ++k) B.col(k) = fr[k];
    return B.colPivHouseholderQr().solve(X);
}

// ---------------------------------------------------------------------------
// Diagnostics

struct Report {
    std::vector<std::pair<std::string, double>> entries;

    void add(std::string name, double value) { entries.emplace_back(std::move(name), value); }
    double get(const std::string& name) const {
        for (const auto& [k, v] : entries)
            if (k == name) return v;
        throw std::out_of_range("report has no entry '" + name + "'");
    }
    double max() const {
        double m = 0.0;
        for (const auto& [k, v] : entries) m = std::max(m, std::isnan(v) ? INFINITY : v);
        return m;
    }
    bool all_below(double tol) const { return max() < tol; }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : entries) j[k] = v;
        return j;
    }
};

inline double interior_sup_fn(const DomainPtr& dom, const std::function<double(int)>& fn) {
    double m = 0.0;
    for (int i = dom->grid.interior_begin(); i < dom->grid.interior_end(); ++i)
        m = std::max(m, std::abs(fn(i)));
    return m;
}

inline std::complex<double> complex_pair(const Bivector& re, const Bivector& im, const CVec4& xi,
                                         const CVec4& eta) {
    const CMat4 C = re.c.cast<std::complex<double>>() +
                    std::complex<double>(0, 1) * im.c.cast<std::complex<double>>();
    return xi.transpose() * C * eta;
}

// |sigma_I|^2_g with the 1/2! normalization of bivector norms and the
// hermitian pairing on complex tensors.
inline double sigma_I_norm2(const Metric4& g, const Bivector& re, const Bivector& im) {
    double s = 0.0;
    const Mat4 gg = g;
    for (const Mat4* C : {&re.c, &im.c}) {
        const Mat4 low = gg * (*C) * gg.transpose();
        s += (low.array() * C->array()).sum();
    }
    return s / 8.0;
}

inline double sigma_norm2(const Metric4& g, const Bivector& s) {
    const Mat4 low = g * s.c * g.transpose();
    return (low.array() * s.c.array()).sum() / 2.0;
}

// Sup-norm residuals of the GK axioms and the identities of the family.
// Never throws on a bad state: a failed identity shows up as a large entry.
// Axioms that hold for any generalized Kahler state on the domain, without
// reference to the holomorphic coordinates of the standard structure.
inline Report verify_gk_axioms(const GKState& s) {
    Report r;
    const DomainPtr& dom = s.dom;
    const int n = s.g.size();

    r.add("dc_sum", (s.H + d_c(s.J, s.omega_J)).interior_sup());
    r.add("dH", exterior_d(s.H).interior_sup());
    r.add("nijenhuis_I", nijenhuis(s.I).interior_sup());
    r.add("nijenhuis_J", nijenhuis(s.J).interior_sup());

    // I theta_I +- J theta_J = 1/2 (I +- J) d log det(I +- J).
    ScalarField ldp(dom), ldm(dom);
    for (int i = 0; i < n; ++i) {
        ldp.v[i] = std::log(std::abs(s.det_plus.v[i]));
        ldm.v[i] = std::log(std::abs(s.det_minus.v[i]));
    }
    const auto dldp = exterior_d(ldp), dldm = exterior_d(ldm);
    r.add("lee_identity_plus", interior_sup_fn(dom, [&](int i) {
              const Form1 lhs = act_on_form(s.I.v[i], s.theta_I.v[i]) +
                                act_on_form(s.J.v[i], s.theta_J.v[i]);
              const Form1 rhs = 0.5 * act_linear(s.I.v[i] + s.J.v[i], dldp.v[i]);
              return (lhs - rhs).max_abs();
          }));
    r.add("lee_identity_minus", interior_sup_fn(dom, [&](int i) {
              const Form1 lhs = act_on_form(s.I.v[i], s.theta_I.v[i]) -
                                act_on_form(s.J.v[i], s.theta_J.v[i]);
              const Form1 rhs = 0.5 * act_linear(s.I.v[i] - s.J.v[i], dldm.v[i]);
              return (lhs - rhs).max_abs();
          }));
    r.add("I_squared", interior_sup_fn(dom, [&](int i) {
              return (s.I.v[i] * s.I.v[i] + Mat4::Identity()).cwiseAbs().maxCoeff();
          }));
    r.add("J_squared", interior_sup_fn(dom, [&](int i) {
              return (s.J.v[i] * s.J.v[i] + Mat4::Identity()).cwiseAbs().maxCoeff();
          }));
    r.add("compatibility", interior_sup_fn(dom, [&](int i) {
              const Mat4& J = s.J.v[i];
              const Mat4& I = s.I.v[i];
              const Mat4& G = s.g.v[i];
              return std::max((J.transpose() * G * J - G).cwiseAbs().maxCoeff(),
                              (I.transpose() * G * I - G).cwiseAbs().maxCoeff());
          }));
    return r;
}

inline Report verify_gk(const GKState& s) {
    Report r = verify_gk_axioms(s);
    const DomainPtr& dom = s.dom;
    const int n = s.g.size();
    ScalarField ldp(dom), ldm(dom);
    for (int i = 0; i < n; ++i) {
        ldp.v[i] = std::log(std::abs(s.det_plus.v[i]));
        ldm.v[i] = std::log(std::abs(s.det_minus.v[i]));
    }

    // theta_I# - theta_J# = sigma(dPhi, .) with Phi = 1/2 log(det(I-J)/det(I+J)).
    const ScalarField Phi = 0.5 * (ldm - ldp);
    const auto dPhi = exterior_d(Phi);
    const VectorField tI = sharp(s.g, s.theta_I), tJ = sharp(s.g, s.theta_J);
    r.add("lee_sigma", interior_sup_fn(dom, [&](int i) {
              const Vec4 d = tI.v[i] - tJ.v[i] - s.sigma.v[i].contract_first(as_vec(dPhi.v[i]));
              return d.cwiseAbs().maxCoeff();
          }));

    // sigma_I = c d/dw1 ^ d/dw2 with c a real constant.
    const CVec4 w1 = dw1(), w2 = dw2();
    std::vector<std::complex<double>> coef(n);
    double type_defect = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& re = s.sigma_I_re.v[i];
        const auto& im = s.sigma_I_im.v[i];
        coef[i] = complex_pair(re, im, w1, w2);
        if (i >= s.grid().interior_begin() && i < s.grid().interior_end()) {
            type_defect = std::max({type_defect,
                                    std::abs(complex_pair(re, im, w1.conjugate(), w2)),
                                    std::abs(complex_pair(re, im, w1, w2.conjugate())),
                                    std::abs(complex_pair(re, im, w1.conjugate(), w2.conjugate())),
                                    std::abs(complex_pair(re, im, w1.conjugate(), w1)),
                                    std::abs(complex_pair(re, im, w2.conjugate(), w2))});
        }
    }
    ScalarField coef_re(dom);
    for (int i = 0; i < n; ++i) coef_re.v[i] = coef[i].real();
    r.add("sigma_constancy", ddt(coef_re).interior_sup());
    r.add("sigma_realness", interior_sup_fn(dom, [&](int i) { return coef[i].imag(); }));
    r.add("sigma_type", type_defect);

    // These two relations are stated for the second-slot contraction sigma(., xi).
    const ScalarField& p = s.angle;
    const ScalarField lp = map(p, [](double x) { return 2.0 * std::atanh(x); });
    const auto dlp = exterior_d(lp);  // 2 dp / (1 - p^2)
    r.add("p_sigma", interior_sup_fn(dom, [&](int i) {
              const Vec4 d = s.sigma.v[i].contract_second(as_vec(dlp.v[i])) - (tI.v[i] - tJ.v[i]);
              return d.cwiseAbs().maxCoeff();
          }));
    ScalarField lsn(dom);
    for (int i = 0; i < n; ++i) lsn.v[i] = std::log(sigma_norm2(s.g.v[i], s.sigma.v[i]));
    const auto dlsn = exterior_d(lsn);
    r.add("lee_canonical", interior_sup_fn(dom, [&](int i) {
              const Vec4 d = s.sigma.v[i].contract_second(as_vec(dlsn.v[i])) + 2.0 * p.v[i] * tI.v[i];
              return d.cwiseAbs().maxCoeff();
          }));
    r.add("sigma_norm", interior_sup_fn(dom, [&](int i) {
              return sigma_I_norm2(s.g.v[i], s.sigma_I_re.v[i], s.sigma_I_im.v[i]) -
                     (1.0 - p.v[i] * p.v[i]);
          }));

    double kinv = 0.0;
    for (const Vec4& X : killing_frame(s.params)) {
        VectorField Xf(dom);
        for (auto& x : Xf.v) x = X;
        kinv = std::max({kinv, lie_derivative(Xf, s.g).interior_sup(),
                         lie_derivative(Xf, s.I).interior_sup(),
                         lie_derivative(Xf, s.J).interior_sup()});
    }
    r.add("k_invariance", kinv);
    return r;
}

// The identities recovering g and F_pm from (sigma, I, J).
inline Report verify_recovery(const GKState& s) {
    Report r;
    const DomainPtr& dom = s.dom;
    r.add("g_from_F_minus", interior_sup_fn(dom, [&](int i) {
              return (s.g.v[i] - sym_part(precompose_tensor(s.F_minus.v[i], s.J.v[i])))
                  .cwiseAbs()
                  .maxCoeff();
          }));
    r.add("g_from_F_plus", interior_sup_fn(dom, [&](int i) {
              return (s.g.v[i] + sym_part(precompose_tensor(s.F_plus.v[i], s.J.v[i])))
                  .cwiseAbs()
                  .maxCoeff();
          }));
    // F_pm = sigma^{-1} J -+ sigma^{-1} I, with sigma^{-1} as the 2-form S^{-T}.
    r.add("F_from_sigma", interior_sup_fn(dom, [&](int i) {
              const Mat4 Om = s.sigma.v[i].first_slot_map().inverse().transpose();
              const Mat4 Jt = s.J.v[i].transpose(), It = s.I.v[i].transpose();
              return std::max((as_matrix(s.F_plus.v[i]) - (Jt * Om - It * Om)).cwiseAbs().maxCoeff(),
                              (as_matrix(s.F_minus.v[i]) - (Jt * Om + It * Om)).cwiseAbs().maxCoeff());
          }));
    return r;
}

// sigma^{-1} as a 2-form.
inline Form2 sigma_inverse(const Bivector& s) {
    return as_form2(s.first_slot_map().inverse().transpose());
}

// Columns for the state export CSV.
struct StateTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

inline StateTable state_table(const GKState& s, const ScalarField* f, const PsiPair* psi) {
    StateTable t;
    const int n = s.g.size();
    auto push = [&](std::string name, std::vector<double> col) {
        t.header.push_back(std::move(name));
        t.columns.push_back(std::move(col));
    };
    push("t", s.grid().t());
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = s.angle.v[i];
    push("p", p);
    if (f) push("f", f->v);
    push("det_I_plus_J", s.det_plus.v);
    push("det_I_minus_J", s.det_minus.v);
    if (psi) {
        push("psi_plus", psi->plus.v);
        push("psi_minus", psi->minus.v);
    }
    push("angle", s.angle.v);
    return t;
}

}  // namespace gklab
