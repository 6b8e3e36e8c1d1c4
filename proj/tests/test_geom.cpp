// Pointwise multilinear algebra: exterior algebra identities, structure maps,
// musical isomorphisms and the complex-structure projection.

#include <gtest/gtest.h>

#include <random>

#include "gklab/geom.hpp"

using namespace gklab;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 r(7);
    return r;
}

double uni() { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng()); }

template <int K>
AltForm<K> random_form() {
    AltForm<K> raw;
    for (double& x : raw.c) x = uni();
    // Antisymmetrize: sum over permutations with sign, divided by K!.
    AltForm<K> out;
    const auto& pt = detail::perms(K);
    std::array<int, 4> ix{}, jx{};
    for (int f = 0; f < AltForm<K>::size; ++f) {
        detail::unflatten<K>(f, ix);
        double s = 0.0;
        for (int q = 0; q < pt.count; ++q) {
            for (int i = 0; i < K; ++i) jx[i] = ix[pt.perm[q][i]];
            s += pt.sign[q] * raw.c[detail::flatten<K>(jx)];
        }
        out.c[f] = s / detail::factorial(K);
    }
    return out;
}

Vec4 random_vec() { return Vec4(uni(), uni(), uni(), uni()); }

Mat4 random_spd() {
    Mat4 A;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A(i, j) = uni();
    return A * A.transpose() + 0.5 * Mat4::Identity();
}

Endo4 std_I() {
    Endo4 I = Endo4::Zero();
    I(1, 0) = 1;
    I(0, 1) = -1;
    I(3, 2) = 1;
    I(2, 3) = -1;
    return I;
}

// A random complex structure: P I P^{-1}.
Endo4 random_complex_structure() {
    Mat4 P;
    do {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) P(i, j) = uni() + (i == j ? 2.0 : 0.0);
    } while (std::abs(P.determinant()) < 0.5);
    return P * std_I() * P.inverse();
}

template <int K>
double diff(const AltForm<K>& a, const AltForm<K>& b) {
    return (a - b).max_abs();
}

}  // namespace

TEST(ExteriorAlgebra, WedgeIsGradedCommutative) {
    for (int trial = 0; trial < 20; ++trial) {
        const auto a1 = random_form<1>(), b1 = random_form<1>();
        const auto a2 = random_form<2>(), b2 = random_form<2>();
        const auto a3 = random_form<3>();
        EXPECT_LT(diff(wedge(a1, b1), -1.0 * wedge(b1, a1)), 1e-14);
        EXPECT_LT(diff(wedge(a1, a2), wedge(a2, a1)), 1e-14);
        EXPECT_LT(diff(wedge(a2, b2), wedge(b2, a2)), 1e-14);
        EXPECT_LT(diff(wedge(a1, a3), -1.0 * wedge(a3, a1)), 1e-14);
        EXPECT_LT(wedge(a1, a1).max_abs(), 1e-15);
    }
}

TEST(ExteriorAlgebra, WedgeIsAssociative) {
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_form<1>(), b = random_form<1>();
        const auto c = random_form<2>();
        EXPECT_LT(diff(wedge(wedge(a, b), c), wedge(a, wedge(b, c))), 1e-13);
    }
}

TEST(ExteriorAlgebra, WedgeOfCovectorsIsDeterminant) {
    const auto a = random_form<1>(), b = random_form<1>();
    const auto w = wedge(a, b);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(w(i, j), a.c[i] * b.c[j] - a.c[j] * b.c[i], 1e-15);
}

TEST(ExteriorAlgebra, InteriorProductIsAnAntiderivation) {
    for (int trial = 0; trial < 20; ++trial) {
        const Vec4 X = random_vec();
        const auto a = random_form<1>();
        const auto b = random_form<2>();
        const auto lhs = interior(X, wedge(a, b));
        const auto rhs = interior(X, a).c[0] * b - wedge(a, interior(X, b));
        EXPECT_LT(diff(lhs, rhs), 1e-13);
        EXPECT_LT(std::abs(interior(X, interior(X, b)).c[0]), 1e-14);
    }
}

TEST(ExteriorAlgebra, TopDensityIsHalfTheSquare) {
    for (int trial = 0; trial < 20; ++trial) {
        const auto F = random_form<2>();
        EXPECT_NEAR(top_density(F), 0.5 * wedge(F, F)(0, 1, 2, 3), 1e-14);
        // Pfaffian squared is the determinant.
        EXPECT_NEAR(top_density(F) * top_density(F), as_matrix(F).determinant(), 1e-13);
    }
    Form2 omega;
    omega(0, 1) = 1;
    omega(1, 0) = -1;
    omega(2, 3) = 1;
    omega(3, 2) = -1;
    EXPECT_DOUBLE_EQ(top_density(omega), 1.0);
}

TEST(ExteriorAlgebra, EndomorphismActionConventions) {
    const Endo4 I = random_complex_structure();
    const auto a = random_form<1>();
    const Vec4 X = random_vec();
    // (I a)(X) = -a(I X).
    EXPECT_NEAR(as_vec(act_on_form(I, a)).dot(X), -as_vec(a).dot(I * X), 1e-13);
    // I acting twice on a k-form multiplies by (-1)^k, and I respects wedge products.
    EXPECT_LT(diff(act_on_form(I, act_on_form(I, a)), -1.0 * a), 1e-12);
    const auto b = random_form<2>();
    EXPECT_LT(diff(act_on_form(I, act_on_form(I, b)), b), 1e-12);
    const auto c = random_form<1>();
    EXPECT_LT(diff(act_on_form(I, wedge(a, c)), wedge(act_on_form(I, a), act_on_form(I, c))), 1e-12);
}

TEST(StructureMaps, FundamentalFormOfTheStandardStructure) {
    const Form2 w = form_from_endo(std_I(), Mat4::Identity());
    EXPECT_DOUBLE_EQ(w(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(w(2, 3), 1.0);
    EXPECT_DOUBLE_EQ(w(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(top_density(w), 1.0);
}

TEST(StructureMaps, MatrixFormRoundTrip) {
    const auto F = random_form<2>();
    EXPECT_LT(diff(as_form2(as_matrix(F)), F), 1e-15);
    const Mat4 M = as_matrix(F);
    EXPECT_LT((M + M.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(StructureMaps, BivectorContractions) {
    Mat4 S;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) S(i, j) = uni();
    const Mat4 A = S - S.transpose();
    const Bivector s = Bivector::from_first_slot_map(A);
    const Vec4 xi = random_vec(), eta = random_vec();
    EXPECT_LT((s.contract_first(xi) - A * xi).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((s.first_slot_map() - A).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(s(xi, eta), eta.dot(s.contract_first(xi)), 1e-14);
    EXPECT_NEAR(s(xi, eta), -s(eta, xi), 1e-14);
    EXPECT_LT((s.contract_second(xi) + s.contract_first(xi)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(StructureMaps, AngleAndCommutator) {
    const Endo4 I = std_I();
    EXPECT_DOUBLE_EQ(angle(I, I), 1.0);
    EXPECT_DOUBLE_EQ(angle(I, -I), -1.0);
    EXPECT_EQ(commutator(I, I).cwiseAbs().maxCoeff(), 0.0);
    const Endo4 J = random_complex_structure();
    EXPECT_LT((commutator(I, J) + commutator(J, I)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Musical, SharpInvertsFlat) {
    for (int trial = 0; trial < 10; ++trial) {
        const Mat4 g = random_spd();
        const Vec4 X = random_vec();
        EXPECT_LT((sharp(g, flat(g, X)) - X).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Musical, IndefiniteMetricIsRejected) {
    Mat4 g = Mat4::Identity();
    g(2, 2) = -1.0;
    EXPECT_THROW(sharp(g, basis1(0)), DegenerateMetric);
    EXPECT_THROW(require_positive(g), DegenerateMetric);
    EXPECT_THROW(require_positive(Mat4::Zero()), DegenerateMetric);
}

TEST(Musical, FormNormOfOrthonormalCoframe) {
    const Mat4 id = Mat4::Identity();
    EXPECT_DOUBLE_EQ(form_norm2(id, basis1(2)), 1.0);
    EXPECT_NEAR(form_norm2(id, wedge(basis1(0), basis1(3))), 1.0, 1e-15);
    EXPECT_NEAR(form_norm2(id, wedge(wedge(basis1(0), basis1(1)), basis1(2))), 1.0, 1e-15);
    // Invariance under a change of frame: |P^T a|^2 in P^{-1} g^{-1} P^{-T} equals |a|^2 in g^{-1}.
    const Mat4 g = random_spd();
    const auto F = random_form<2>();
    Mat4 P = random_spd();
    const Mat4 ginv = g.inverse();
    const Form2 F2 = as_form2(P.transpose() * as_matrix(F) * P);
    const Mat4 ginv2 = P.inverse() * ginv * P.inverse().transpose();
    EXPECT_NEAR(form_norm2(ginv2, F2), form_norm2(ginv, F), 1e-10);
}

TEST(ComplexStructure, ProjectionFixesExactStructures) {
    const Endo4 I = random_complex_structure();
    EXPECT_TRUE(is_complex_structure(I, 1e-12));
    EXPECT_LT((project_complex_structure(I) - I).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ComplexStructure, ProjectionRestoresSquareMinusOne) {
    for (int trial = 0; trial < 20; ++trial) {
        const Endo4 I = random_complex_structure();
        Mat4 E;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) E(i, j) = 1e-6 * uni();
        const Endo4 K = project_complex_structure(I + E);
        EXPECT_TRUE(is_complex_structure(K, 1e-13));
        EXPECT_LT((K - I).cwiseAbs().maxCoeff(), 1e-4);
    }
}
