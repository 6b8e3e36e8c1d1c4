// Grids and reduced-field calculus. The Riemannian operators are compared with
// a brute-force oracle that differentiates the metric in all four coordinates
// by nested central differences, never using the reduction to t.

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "gklab/calculus.hpp"

using namespace gklab;

namespace {

constexpr double kA = -1.3, kB = -1.0;

DomainPtr domain(int n, double t_max = 5.0, Scheme scheme = Scheme::UniformCentral4) {
    GridSpec s;
    s.n = n;
    s.t_max = t_max;
    s.scheme = scheme;
    return make_domain(s, kA, kB);
}

double interior_error(const DomainPtr& dom, const std::vector<double>& f, const std::function<double(double)>& exact) {
    double e = 0.0;
    for (int i = dom->grid.interior_begin(); i < dom->grid.interior_end(); ++i)
        e = std::max(e, std::abs(f[i] - exact(dom->grid.t(i))));
    return e;
}

// A t-dependent symmetric positive definite matrix with all entries nonzero.
Mat4 metric_of_t(double t) {
    Mat4 B;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) B(i, j) = 0.3 * std::sin((i + 1) * t + 0.7 * j) + (i == j ? 1.0 : 0.0);
    return B * B.transpose() + 0.2 * Mat4::Identity();
}

double t_of(const Vec4& x) { return 2.0 * ((kB / kA) * x(0) - x(2)); }

// Fourth-order central difference of a matrix-valued function along axis k.
Mat4 fd(const std::function<Mat4(const Vec4&)>& F, const Vec4& x, int k, double h) {
    Vec4 e = Vec4::Zero();
    e(k) = h;
    return (-F(x + 2 * e) + 8 * F(x + e) - 8 * F(x - e) + F(x - 2 * e)) / (12 * h);
}

// Christoffel symbols Gamma^k_{ij} of x -> metric_of_t(t(x)), as 4 matrices Gamma[k](i, j).
std::array<Mat4, 4> christoffel_oracle(const Vec4& x, double h) {
    const auto G = [](const Vec4& y) { return metric_of_t(t_of(y)); };
    std::array<Mat4, 4> dg;
    for (int k = 0; k < 4; ++k) dg[k] = fd(G, x, k, h);
    const Mat4 ginv = G(x).inverse();
    std::array<Mat4, 4> Gam;
    for (int k = 0; k < 4; ++k) {
        Gam[k].setZero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int l = 0; l < 4; ++l)
                    Gam[k](i, j) += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
    }
    return Gam;
}

Mat4 ricci_oracle_at(const Vec4& x, double h) {
    const auto Gam = christoffel_oracle(x, h);
    std::array<std::array<Mat4, 4>, 4> dGam;  // dGam[m][k] = d_m Gamma^k
    for (int m = 0; m < 4; ++m) {
        Vec4 e = Vec4::Zero();
        e(m) = h;
        const auto p2 = christoffel_oracle(x + 2 * e, h), p1 = christoffel_oracle(x + e, h);
        const auto m1 = christoffel_oracle(x - e, h), m2 = christoffel_oracle(x - 2 * e, h);
        for (int k = 0; k < 4; ++k) dGam[m][k] = (-p2[k] + 8 * p1[k] - 8 * m1[k] + m2[k]) / (12 * h);
    }
    Mat4 R = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                R(i, j) += dGam[k][k](i, j) - dGam[j][k](i, k);
                for (int l = 0; l < 4; ++l) R(i, j) += Gam[k](k, l) * Gam[l](i, j) - Gam[k](j, l) * Gam[l](i, k);
            }
    return R;
}

// The nested differences carry an h^4 error of about 1e-5 at h = 2e-3, so two
// steps are combined by Richardson extrapolation.
Mat4 ricci_oracle(const Vec4& x) { return (16 * ricci_oracle_at(x, 2e-3) - ricci_oracle_at(x, 4e-3)) / 15; }

// Largest interior error of a discretized identity at n and 2n points.
template <class F>
std::pair<double, double> at_two_resolutions(int n, F&& error_at) {
    return {error_at(domain(n)), error_at(domain(2 * n))};
}

EndoField metric_field(const DomainPtr& dom) {
    EndoField g(dom, "sym2");
    for (int i = 0; i < g.size(); ++i) g.v[i] = metric_of_t(dom->grid.t(i));
    return g;
}

}  // namespace

TEST(Grid, UniformDerivativeIsFourthOrder) {
    const auto f = [](double t) { return std::sin(1.3 * t) * std::exp(-t * t / 8); };
    const auto df = [](double t) {
        return (1.3 * std::cos(1.3 * t) - t / 4 * std::sin(1.3 * t)) * std::exp(-t * t / 8);
    };
    double prev = 0.0;
    for (int n : {128, 256, 512, 1024}) {
        const auto dom = domain(n);
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = f(dom->grid.t(i));
        const double e = interior_error(dom, dom->grid.derivative(v), df);
        if (prev > 0.0) {
            EXPECT_GT(prev / e, 12.0) << "n = " << n;
        }
        prev = e;
    }
    EXPECT_LT(prev, 1e-8);
}

TEST(Grid, UniformStencilIsExactOnQuartics) {
    const auto dom = domain(64);
    std::vector<double> v(64);
    for (int i = 0; i < 64; ++i) {
        const double t = dom->grid.t(i);
        v[i] = t * t * t * t - 2 * t * t + t;
    }
    const auto d = dom->grid.derivative(v);
    for (int i = 0; i < 64; ++i) {
        const double t = dom->grid.t(i);
        EXPECT_NEAR(d[i], 4 * t * t * t - 4 * t + 1, 1e-10 * (1 + std::abs(t * t * t)));
    }
}

TEST(Grid, ChebyshevDerivativeResolvesSteepProfiles) {
    const auto dom = domain(512, 20.0, Scheme::ChebyshevMapped);
    std::vector<double> v(512);
    for (int i = 0; i < 512; ++i) v[i] = std::tanh(dom->grid.t(i));
    const double e = interior_error(dom, dom->grid.derivative(v), [](double t) { return 1 / std::pow(std::cosh(t), 2); });
    EXPECT_LT(e, 1e-10);
}

TEST(Grid, QuadratureAndAntiderivative) {
    for (Scheme s : {Scheme::UniformCentral4, Scheme::ChebyshevMapped}) {
        const auto dom = domain(1024, 6.0, s);
        std::vector<double> f(1024);
        for (int i = 0; i < 1024; ++i) f[i] = 1 / std::pow(std::cosh(dom->grid.t(i)), 2);
        EXPECT_NEAR(dom->grid.integrate(f), 2 * std::tanh(6.0), 1e-9) << scheme_name(s);
        const auto F = dom->grid.antiderivative(f, 0.0);
        double e = 0.0;
        const double t0 = dom->grid.t(dom->grid.nearest(0.0));
        for (int i = 0; i < 1024; ++i) e = std::max(e, std::abs(F[i] - (std::tanh(dom->grid.t(i)) - std::tanh(t0))));
        EXPECT_LT(e, 1e-8) << scheme_name(s);
        EXPECT_EQ(F[dom->grid.nearest(0.0)], 0.0);
    }
}

TEST(Grid, CubicInterpolationIsExactOnCubics) {
    const auto dom = domain(64);
    std::vector<double> v(64);
    const auto p = [](double t) { return t * t * t - 2 * t + 0.5; };
    for (int i = 0; i < 64; ++i) v[i] = p(dom->grid.t(i));
    for (double tq : {-4.93, -1.1, 0.0, 0.37, 2.5, 4.99})
        EXPECT_NEAR(dom->grid.interpolate(v, tq), p(tq), 1e-11) << tq;
}

TEST(Grid, InvalidSpecsAreRejected) {
    GridSpec s;
    s.n = 16;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.n = 64;
    s.t_max = -1;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Fibre, DeckVolumeMatchesMonteCarlo) {
    // Volume of {|t| < T, 0 <= x1/a < 1} x [0, 2pi)^2 in (x1, y1, x2, y2), by sampling
    // (x1, x2) in a bounding box of the strip.
    const double T = 3.0;
    const auto dom = domain(64, T);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(kA, 0.0);
    const double x2lo = (kB / kA) * kA - T / 2, x2hi = T / 2;
    std::uniform_real_distribution<double> uy(x2lo, x2hi);
    const int samples = 2'000'000;
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
        Vec4 x(ux(rng), 0.0, uy(rng), 0.0);
        if (std::abs(t_of(x)) < T) ++hits;
    }
    const double area = std::abs(kA) * (x2hi - x2lo) * hits / samples;
    const double mc = 4 * std::numbers::pi * std::numbers::pi * area;
    EXPECT_NEAR(mc / (dom->c_deck * 2 * T), 1.0, 3e-3);
    // integrate_M of 1 is the same volume.
    EXPECT_NEAR(integrate_M(ScalarField(dom, std::vector<double>(64, 1.0))), dom->c_deck * 2 * T, 1e-10);
}

TEST(Calculus, ExteriorDerivativeInCoordinates) {
    const auto dom = domain(512);
    const auto h = tabulate(dom, [](double t) { return std::sin(t); });
    ReducedField<Form1> a(dom);
    for (int i = 0; i < a.size(); ++i) a.v[i] = h.v[i] * basis1(1);
    const auto da = exterior_d(a);
    const Vec4 c = dom->frame.c;
    double e = 0.0;
    for (int i = dom->grid.interior_begin(); i < dom->grid.interior_end(); ++i) {
        const double hp = std::cos(dom->grid.t(i));
        for (int k = 0; k < 4; ++k) e = std::max(e, std::abs(da.v[i](k, 1) - hp * c(k)));
    }
    EXPECT_LT(e, 1e-7);
    EXPECT_LT(exterior_d(da).interior_sup(), 1e-12);
    EXPECT_LT(exterior_d(exterior_d(h)).interior_sup(), 1e-12);
}

// The Cartan formula and the Leibniz rules hold exactly for the continuum
// operators; on the grid the defect is the h^4 truncation error of the stencil.
// Each identity is checked for a fourth-order decay and an absolute bound at
// n = 4096.
constexpr double kOrderRatio = 12.0;
constexpr double kIdentityTol = 1e-7;

void expect_fourth_order(const std::pair<double, double>& e, const char* what) {
    EXPECT_GT(e.first / e.second, kOrderRatio) << what << ": " << e.first << " -> " << e.second;
    EXPECT_LT(e.second, kIdentityTol) << what;
}

TEST(Calculus, CartanFormula) {
    auto defect = [](int degree) {
        return [degree](const DomainPtr& dom) {
            VectorField X(dom);
            ReducedField<Form1> a(dom);
            ReducedField<Form2> b(dom);
            for (int i = 0; i < X.size(); ++i) {
                const double t = dom->grid.t(i);
                X.v[i] = Vec4(std::sin(t), 0.5, std::cos(2 * t), t / 5);
                a.v[i] = as_form(Vec4(std::tanh(t), std::sin(t), 1.0, std::cos(t)));
                b.v[i] = wedge(a.v[i], basis1(1)) + std::exp(-t * t) * wedge(basis1(0), basis1(3));
            }
            if (degree == 1)
                return (lie_derivative(X, a) - (interior(X, exterior_d(a)) + exterior_d(interior(X, a)))).interior_sup();
            return (lie_derivative(X, b) - (interior(X, exterior_d(b)) + exterior_d(interior(X, b)))).interior_sup();
        };
    };
    expect_fourth_order(at_two_resolutions(2048, defect(1)), "1-forms");
    expect_fourth_order(at_two_resolutions(2048, defect(2)), "2-forms");
}

struct LeibnizDefects {
    double bracket, metric, bivector, endo;
};

LeibnizDefects leibniz_defects(const DomainPtr& dom) {
    VectorField X(dom), Y(dom), Z(dom);
    ReducedField<Form1> al(dom), be(dom);
    ReducedField<Bivector> s(dom);
    for (int i = 0; i < X.size(); ++i) {
        const double t = dom->grid.t(i);
        X.v[i] = Vec4(std::sin(t), 0.3, std::cos(t), 0.1 * t);
        Y.v[i] = Vec4(1.0, std::tanh(t), 0.2, std::sin(2 * t));
        Z.v[i] = Vec4(std::exp(-t * t), 1.0, t / 3, 0.5);
        al.v[i] = as_form(Vec4(std::cos(t), 1.0, std::sin(t), 0.0));
        be.v[i] = as_form(Vec4(0.2, std::tanh(t), 1.0, std::cos(3 * t)));
        Mat4 A;
        for (int r = 0; r < 4; ++r)
            for (int q = 0; q < 4; ++q) A(r, q) = std::sin((r + 1) * t + q);
        s.v[i] = Bivector{A - A.transpose()};
    }
    LeibnizDefects d;
    d.bracket = (lie_derivative(X, Y) + lie_derivative(Y, X)).interior_sup();

    // L_X(g(Y,Z)) = (L_X g)(Y,Z) + g(L_X Y, Z) + g(Y, L_X Z).
    const EndoField g = metric_field(dom);
    const EndoField Lg = lie_derivative(X, g);
    const VectorField LY = lie_derivative(X, Y), LZ = lie_derivative(X, Z);
    ScalarField gyz(dom), rhs(dom);
    for (int i = 0; i < gyz.size(); ++i) {
        gyz.v[i] = Y.v[i].dot(g.v[i] * Z.v[i]);
        rhs.v[i] = Y.v[i].dot(Lg.v[i] * Z.v[i]) + LY.v[i].dot(g.v[i] * Z.v[i]) + Y.v[i].dot(g.v[i] * LZ.v[i]);
    }
    d.metric = (lie_derivative(X, gyz) - rhs).interior_sup();

    // L_X(s(al, be)) = (L_X s)(al, be) + s(L_X al, be) + s(al, L_X be).
    const auto Ls = lie_derivative(X, s);
    const auto La = lie_derivative(X, al), Lb = lie_derivative(X, be);
    ScalarField sab(dom), rhs2(dom);
    for (int i = 0; i < sab.size(); ++i) {
        const Vec4 a = as_vec(al.v[i]), b = as_vec(be.v[i]);
        sab.v[i] = s.v[i](a, b);
        rhs2.v[i] = Ls.v[i](a, b) + s.v[i](as_vec(La.v[i]), b) + s.v[i](a, as_vec(Lb.v[i]));
    }
    d.bivector = (lie_derivative(X, sab) - rhs2).interior_sup();

    // (L_X A)(Y) = L_X(A Y) - A(L_X Y).
    EndoField A(dom);
    for (int i = 0; i < A.size(); ++i) A.v[i] = metric_of_t(dom->grid.t(i)) * 0.5;
    const EndoField LA = lie_derivative(X, A);
    const VectorField AY = zip(A, Y, [](const Mat4& m, const Vec4& y) -> Vec4 { return m * y; });
    VectorField rhs3(dom);
    for (int i = 0; i < rhs3.size(); ++i) rhs3.v[i] = LA.v[i] * Y.v[i] + A.v[i] * LY.v[i];
    d.endo = (lie_derivative(X, AY) - rhs3).interior_sup();
    return d;
}

TEST(Calculus, LieDerivativeLeibnizRules) {
    const LeibnizDefects coarse = leibniz_defects(domain(2048)), fine = leibniz_defects(domain(4096));
    // The bracket is antisymmetric at every resolution.
    EXPECT_LT(coarse.bracket, 1e-12);
    EXPECT_LT(fine.bracket, 1e-12);
    expect_fourth_order({coarse.metric, fine.metric}, "metric");
    expect_fourth_order({coarse.bivector, fine.bivector}, "bivector");
    expect_fourth_order({coarse.endo, fine.endo}, "endomorphism");
}

TEST(Calculus, ConstantFieldsAreInvariantUnderConstantFlows) {
    const auto dom = domain(256);
    VectorField X(dom);
    for (auto& x : X.v) x = Vec4(0.3, -1.0, 0.7, 2.0);
    EndoField I(dom);
    for (auto& m : I.v) m = Mat4::Identity() * 2.0;
    EXPECT_EQ(lie_derivative(X, I).interior_sup(), 0.0);
    EndoField bad(dom, "unknown");
    EXPECT_THROW(lie_derivative(X, bad), std::invalid_argument);
}

TEST(Riemannian, RicciMatchesFourDimensionalOracle) {
    const auto dom = domain(4096, 4.0);
    const EndoField Ric = ricci(metric_field(dom));
    for (int i : {700, 1500, 2048, 2600, 3300}) {
        const double t = dom->grid.t(i);
        const Vec4 x(0.0, 0.4, -t / 2, -1.0);  // t(x) = t, y-coordinates arbitrary
        const Mat4 R = ricci_oracle(x);
        EXPECT_LT((Ric.v[i] - R).cwiseAbs().maxCoeff(), 1e-6) << "t = " << t;
        EXPECT_GT(R.cwiseAbs().maxCoeff(), 1e-2);
    }
}

TEST(Riemannian, CodifferentialMatchesDivergenceOracle) {
    const auto dom = domain(4096, 4.0);
    const EndoField g = metric_field(dom);
    auto alpha_of = [](double t) { return Vec4(std::sin(t), 0.5, std::cos(t), std::tanh(t)); };
    auto beta_of = [&](double t) {
        return as_form2(Vec4(1.0, std::sin(t), 0.2, 0.0) * Vec4(0.0, 1.0, std::cos(t), t / 4).transpose());
    };
    ReducedField<Form1> al(dom);
    ReducedField<Form2> be(dom);
    for (int i = 0; i < al.size(); ++i) {
        al.v[i] = as_form(alpha_of(dom->grid.t(i)));
        be.v[i] = beta_of(dom->grid.t(i));
    }
    const auto d1 = codifferential(g, al);
    const auto d2 = codifferential(g, be);
    const double h = 1e-3;
    for (int i : {900, 2048, 3100}) {
        const double t = dom->grid.t(i);
        const Vec4 x(0.0, 0.0, -t / 2, 0.0);
        // delta alpha = -(1/sqrt g) d_k (sqrt g g^{kl} alpha_l).
        auto flux = [&](const Vec4& y) {
            const double ty = t_of(y);
            const Mat4 G = metric_of_t(ty);
            return Mat4(std::sqrt(G.determinant()) * (G.inverse() * alpha_of(ty)).asDiagonal());
        };
        double div = 0.0;
        for (int k = 0; k < 4; ++k) div += fd(flux, x, k, h)(k, k);
        const Mat4 G = metric_of_t(t);
        EXPECT_NEAR(d1.v[i].c[0], -div / std::sqrt(G.determinant()), 1e-8);
        // (delta beta)^l = -(1/sqrt g) d_k (sqrt g beta^{kl}), then lowered.
        auto up = [&](const Vec4& y) {
            const double ty = t_of(y);
            const Mat4 Gy = metric_of_t(ty), Gi = Gy.inverse();
            return Mat4(std::sqrt(Gy.determinant()) * Gi * as_matrix(beta_of(ty)) * Gi);
        };
        Vec4 dv = Vec4::Zero();
        for (int k = 0; k < 4; ++k) dv += fd(up, x, k, h).row(k).transpose();
        const Vec4 expect = G * (-dv / std::sqrt(G.determinant()));
        EXPECT_LT((as_vec(d2.v[i]) - expect).cwiseAbs().maxCoeff(), 1e-8) << "t = " << t;
    }
}

TEST(Riemannian, HessianOfFlatMetric) {
    const auto dom = domain(1024);
    EndoField g(dom, "sym2");
    for (auto& m : g.v) m = Mat4::Identity();
    const auto f = tabulate(dom, [](double t) { return std::sin(t); });
    const EndoField H = hessian(g, f);
    const Vec4 c = dom->frame.c;
    double e = 0.0;
    for (int i = dom->grid.interior_begin(); i < dom->grid.interior_end(); ++i)
        e = std::max(e, (H.v[i] + std::sin(dom->grid.t(i)) * c * c.transpose()).cwiseAbs().maxCoeff());
    EXPECT_LT(e, 1e-7);
    EXPECT_LT(ricci(g).interior_sup(), 1e-15);
}

TEST(Riemannian, DegenerateMetricIsReported) {
    const auto dom = domain(64);
    EndoField g(dom, "sym2");
    for (auto& m : g.v) m = Mat4::Identity();
    g.v[10](3, 3) = 0.0;
    EXPECT_THROW(inverse_metric(g), DegenerateMetric);
}
