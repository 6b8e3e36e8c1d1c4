// The Hopf family as a generalized Kahler structure: axioms, the identities of
// the family, recovery of (g, F+-) from (sigma, I, J) and the potentials psi+-.

#include <gtest/gtest.h>

#include <random>

#include "gklab/hopf.hpp"

using namespace gklab;

namespace {

DomainPtr cheb(const HopfParams& h, int n = 1024, double t_max = 20.0) {
    GridSpec s;
    s.n = n;
    s.t_max = t_max;
    s.scheme = Scheme::ChebyshevMapped;
    return h.domain(s);
}

const HopfParams kSymmetric = HopfParams::from_abs(std::exp(-1.0), std::exp(-1.0));
const HopfParams kSkewed = HopfParams::from_abs(std::exp(-1.0), std::exp(-0.7));

struct ProfileCase {
    double amplitude, scale;
};

constexpr ProfileCase kProfiles[] = {{0.9, 2.0}, {0.5, 1.0}, {0.99, 4.0}};

void expect_report_below(const Report& r, double tol) {
    for (const auto& [name, value] : r.entries) EXPECT_LT(value, tol) << name;
}

}  // namespace

TEST(HopfParams, AcceptsTheOrderedUnitInterval) {
    const HopfParams h = HopfParams::from_abs(0.2, 0.5);
    EXPECT_DOUBLE_EQ(h.a, std::log(0.2));
    EXPECT_DOUBLE_EQ(h.b, std::log(0.5));
    EXPECT_GE(h.ratio(), 1.0);
    EXPECT_NEAR(h.c_deck(), 2.0 * M_PI * M_PI * std::abs(std::log(0.2)), 1e-14);
    EXPECT_NO_THROW(HopfParams::from_abs(0.3, 0.3));
}

TEST(HopfParams, RejectsParametersOutsideTheUnitInterval) {
    EXPECT_THROW(HopfParams::from_abs(1.5, 0.5), ConfigError);
    EXPECT_THROW(HopfParams::from_abs(0.5, 1.0), ConfigError);
    EXPECT_THROW(HopfParams::from_abs(0.0, 0.5), ConfigError);
    EXPECT_THROW(HopfParams::from_abs(0.6, 0.5), ConfigError);
    EXPECT_THROW(HopfParams::from_ab(-1.0, 0.0), ConfigError);
    EXPECT_THROW(HopfParams::from_ab(-0.5, -1.0), ConfigError);
}

TEST(HopfFamily, PointwiseStructuresAreCompatible) {
    for (double p : {-0.99, -0.3, 0.0, 0.7, 0.999}) {
        const Mat4 J = build_J_point(kSkewed, p);
        const Mat4 g = build_metric_point(kSkewed, p);
        const Mat4 I = standard_I();
        EXPECT_LT((J * J + Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((J.transpose() * g * J - g).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((I.transpose() * g * I - g).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_NEAR(angle(I, J), p, 1e-12);
    }
}

TEST(HopfFamily, DegenerationAtTheBoundaryOfTheAngleRange) {
    EXPECT_THROW(build_J_point(kSymmetric, 1.0), LogDegenerate);
    EXPECT_THROW(build_J_point(kSymmetric, -1.2), LogDegenerate);
    EXPECT_THROW(build_metric_point(kSymmetric, 1.0), DegenerateMetric);
    const DomainPtr dom = cheb(kSymmetric, 64, 5.0);
    const ScalarField p = tabulate(dom, [](double t) { return 1.2 * std::tanh(t); });
    EXPECT_THROW(derive_state(kSymmetric, p), LogDegenerate);
}

class AxiomSuite : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(AxiomSuite, AllResidualsVanish) {
    const auto [param_index, profile_index] = GetParam();
    const HopfParams h = param_index == 0 ? kSymmetric : kSkewed;
    const ProfileCase pc = kProfiles[profile_index];
    const DomainPtr dom = cheb(h);
    const GKState s = derive_state(h, tanh_profile(dom, pc.amplitude, pc.scale));
    expect_report_below(verify_gk(s), 1e-7);
    expect_report_below(verify_recovery(s), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(ParametersAndProfiles, AxiomSuite,
                         ::testing::Combine(::testing::Values(0, 1), ::testing::Values(0, 1, 2)));

TEST(HopfFamily, SigmaIsConstantAndIndependentOfTheProfile) {
    const DomainPtr dom = cheb(kSkewed, 256, 10.0);
    const GKState s = derive_state(kSkewed, tanh_profile(dom, 0.8, 1.5));
    const Mat4 S0 = s.sigma.v[0].first_slot_map();
    for (int i = 0; i < dom->grid.size(); ++i)
        EXPECT_LT((s.sigma.v[i].first_slot_map() - S0).cwiseAbs().maxCoeff(), 1e-12);
    // sigma is log-nondegenerate: invertible everywhere on the family.
    EXPECT_GT(std::abs(S0.determinant()), 1.0);
}

TEST(HopfFamily, SigmaNormMatchesTheAngle) {
    const DomainPtr dom = cheb(kSymmetric, 128, 8.0);
    const GKState s = derive_state(kSymmetric, tanh_profile(dom, 0.95, 2.0));
    for (int i = 0; i < dom->grid.size(); ++i) {
        const double p = s.angle.v[i];
        EXPECT_NEAR(sigma_I_norm2(s.g.v[i], s.sigma_I_re.v[i], s.sigma_I_im.v[i]), 1.0 - p * p, 1e-12);
    }
}

TEST(HopfFamily, DeterminantsOfIPlusMinusJ) {
    const DomainPtr dom = cheb(kSkewed, 128, 8.0);
    const GKState s = derive_state(kSkewed, tanh_profile(dom, 0.9, 2.0));
    for (int i = 0; i < dom->grid.size(); ++i) {
        const double p = s.angle.v[i];
        EXPECT_NEAR(s.det_plus.v[i], 4.0 * (1 + p) * (1 + p), 1e-11);
        EXPECT_NEAR(s.det_minus.v[i], 4.0 * (1 - p) * (1 - p), 1e-11);
    }
}

// Random smooth profiles: sums of shifted tanh bumps scaled into (-0.97, 0.97).
TEST(HopfFamily, RandomProfilesSatisfyTheAxioms) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double c1 = u(rng), c2 = u(rng), s1 = 1.5 + u(rng), s2 = 2.5 + u(rng), sh = 2.0 * u(rng);
        const HopfParams h = HopfParams::from_ab(-1.0 - std::abs(u(rng)), -0.5 - 0.4 * std::abs(u(rng)));
        const DomainPtr dom = cheb(h, 1024, 20.0);
        ScalarField p = tabulate(dom, [&](double t) {
            return c1 * std::tanh(t / s1) + c2 * std::tanh((t - sh) / s2);
        });
        double m = 0.0;
        for (double x : p.v) m = std::max(m, std::abs(x));
        for (double& x : p.v) x *= 0.97 / std::max(m, 1.0);
        const GKState s = derive_state(h, p);
        const Report r = verify_gk(s);
        EXPECT_LT(r.max(), 1e-7) << "trial " << trial;
    }
}

TEST(Potentials, NormalizationMatchesTheReferenceVolume) {
    const DomainPtr dom = cheb(kSkewed, 1024, 20.0);
    const GKState s = derive_state(kSkewed, tanh_profile(dom, 0.9, 2.0));
    const ScalarField f = tabulate(dom, [](double t) { return 0.3 * std::tanh(t); });
    const PsiPair psi = psi_pm(s, f);
    const double vol = volume(s);
    EXPECT_GT(vol, 0.0);
    EXPECT_NEAR(psi.reference_volume, vol, 1e-15 * vol);
    EXPECT_NEAR(integrate_M(weighted_density(psi.plus, s.F_plus)), vol, 1e-10 * vol);
    EXPECT_NEAR(integrate_M(weighted_density(psi.minus, s.F_minus)), vol, 1e-10 * vol);
    const PsiPair other = psi_pm(s, f, 2.0 * vol);
    EXPECT_NEAR(other.c_plus - psi.c_plus, std::log(2.0), 1e-12);
}

TEST(Potentials, SymplecticFormsAreNondegenerate) {
    const DomainPtr dom = cheb(kSymmetric, 128, 6.0);
    const GKState s = derive_state(kSymmetric, tanh_profile(dom, 0.6, 1.0));
    for (int i = 0; i < dom->grid.size(); ++i) {
        EXPECT_GT(std::abs(top_density(s.F_plus.v[i])), 1e-6);
        EXPECT_GT(std::abs(top_density(s.F_minus.v[i])), 1e-6);
    }
}

TEST(HopfFamily, KillingFrameSpansTheTorusDirections) {
    const auto fr = killing_frame(kSkewed);
    const Vec4 X = 0.3 * fr[0] - 1.1 * fr[1] + 2.0 * fr[2];
    const Eigen::Vector3d k = frame_coefficients(kSkewed, X);
    EXPECT_NEAR(k(0), 0.3, 1e-13);
    EXPECT_NEAR(k(1), -1.1, 1e-13);
    EXPECT_NEAR(k(2), 2.0, 1e-13);
    // The combination a d/dx1 + b d/dx2 leaves t unchanged.
    const Vec4 c = Vec4(2.0 * kSkewed.b / kSkewed.a, 0, -2.0, 0);
    EXPECT_NEAR(c.dot(fr[2]), 0.0, 1e-14);
}
