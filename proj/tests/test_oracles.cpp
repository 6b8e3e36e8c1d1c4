// Parity of the pointwise constructors with the symbolic closed forms.

#include <gtest/gtest.h>

#include <random>

#include "gklab/hopf.hpp"
#include "oracle_closed_forms.hpp"

using namespace gklab;

namespace {

struct Sample {
    double p, a, b, slope;
};

std::vector<Sample> samples(int count) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> up(-0.95, 0.95), ub(-3.0, -0.1), ur(1.0, 3.0), us(-1.0, 1.0);
    std::vector<Sample> out;
    for (int k = 0; k < count; ++k) {
        const double b = ub(rng);
        const double r = ur(rng);
        const double p = up(rng);
        const double s = us(rng);
        out.push_back({p, r * b, b, s});
    }
    return out;
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

// A 65-point uniform grid centred on t = 0 carrying p = p0 + s t. Central
// differences are exact on linear data, so the Lee form at the centre sample
// is the exact one up to round-off.
struct LinearProfile {
    GKState state;
    int centre;
};

LinearProfile linear_profile(const Sample& smp) {
    GridSpec spec;
    spec.n = 65;
    spec.t_max = 0.02;
    const HopfParams h = HopfParams::from_ab(smp.a, smp.b);
    const DomainPtr dom = h.domain(spec);
    const ScalarField p = tabulate(dom, [&](double t) { return smp.p + smp.slope * t; });
    return {derive_state(h, p), 32};
}

}  // namespace

TEST(OracleParity, ComplexStructureJ) {
    for (const Sample& s : samples(100)) {
        const Mat4 num = build_J_point(HopfParams::from_ab(s.a, s.b), s.p);
        const Mat4 ref = oracle::J(s.p, s.a, s.b);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) EXPECT_LT(rel(num(i, j), ref(i, j)), 1e-12) << "p=" << s.p;
    }
}

TEST(OracleParity, DeterminantsAndAngle) {
    for (const Sample& s : samples(100)) {
        const Mat4 J = build_J_point(HopfParams::from_ab(s.a, s.b), s.p);
        const Mat4 I = standard_I();
        EXPECT_LT(rel((I + J).determinant(), oracle::det_plus(s.p)), 1e-12);
        EXPECT_LT(rel((I - J).determinant(), oracle::det_minus(s.p)), 1e-12);
        EXPECT_NEAR(angle(I, J), s.p, 1e-12);
    }
}

TEST(OracleParity, LeeFormOfI) {
    for (const Sample& s : samples(100)) {
        const LinearProfile lp = linear_profile(s);
        ASSERT_NEAR(lp.state.grid().t(lp.centre), 0.0, 1e-15);
        const Vec4 num = as_vec(lp.state.theta_I.v[lp.centre]);
        const Vec4 ref = oracle::theta_I(s.p, s.slope, s.a, s.b);
        for (int k = 0; k < 4; ++k) EXPECT_LT(rel(num(k), ref(k)), 1e-12) << "component " << k;
        EXPECT_LT(rel(lp.state.det_plus.v[lp.centre], oracle::det_plus(s.p)), 1e-12);
        EXPECT_LT(rel(lp.state.det_minus.v[lp.centre], oracle::det_minus(s.p)), 1e-12);
    }
}

TEST(OracleParity, PoissonTensorIsTheConstantStandardBivector) {
    for (const Sample& s : samples(20)) {
        const LinearProfile lp = linear_profile(s);
        const int i = lp.centre;
        EXPECT_LT((lp.state.sigma.v[i].first_slot_map() - oracle::S()).cwiseAbs().maxCoeff(), 1e-12);
        const auto c = complex_pair(lp.state.sigma_I_re.v[i], lp.state.sigma_I_im.v[i], dw1(), dw2());
        EXPECT_NEAR(c.real(), oracle::kSigmaICoefficient, 1e-12);
        EXPECT_NEAR(c.imag(), 0.0, 1e-12);
    }
}
