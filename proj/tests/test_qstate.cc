#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.h"
#include "tomomax/qstate.h"

namespace tomomax {
namespace {

using testing::matrix_relative_entropy;
using testing::scalar_kl;

TEST(RelativeEntropy, VanishesOnEqualStates) {
    for (const Vec3 &r : {Vec3{0, 0, 0}, Vec3{0.3, -0.4, 0}, Vec3{1, 0, 0}}) {
        BlochState rho(StateKind::Rebit, r);
        EXPECT_EQ(relative_entropy(rho, rho), 0.0);
    }
    BlochState q(StateKind::Qubit, Vec3{0.2, 0.5, -0.6});
    EXPECT_NEAR(relative_entropy(q, q), 0.0, 1e-15);
}

TEST(RelativeEntropy, PureAgainstMaximallyMixedIsLog2) {
    BlochState pure(StateKind::Rebit, Vec3{1, 0, 0});
    EXPECT_NEAR(relative_entropy(pure, BlochState::maximally_mixed(StateKind::Rebit)), std::numbers::ln2, 1e-15);
    EXPECT_NEAR(matrix_relative_entropy({1, 0, 0}, {0, 0, 0}), std::numbers::ln2, 1e-14);
}

TEST(RelativeEntropy, SupportViolationIsInfinite) {
    BlochState mixed(StateKind::Rebit, Vec3{0.5, 0, 0});
    BlochState pure(StateKind::Rebit, Vec3{1, 0, 0});
    EXPECT_EQ(relative_entropy(mixed, pure), kInf);
    // A pure rho inside the pure sigma's support is fine.
    EXPECT_EQ(relative_entropy(pure, pure), 0.0);
    EXPECT_EQ(relative_entropy(BlochState(StateKind::Rebit, Vec3{-1, 0, 0}), pure), kInf);
}

TEST(RelativeEntropy, CommutingStatesReduceToClassicalKl) {
    // diag(0.25, 0.75) against diag(0.5, 0.5): r_z = 2p - 1.
    BlochState rho(StateKind::Qubit, Vec3{0, 0, -0.5});
    BlochState sigma = BlochState::maximally_mixed(StateKind::Qubit);
    const double kl = scalar_kl(0.25, 0.5);
    EXPECT_NEAR(kl, 0.25 * std::log(0.5) + 0.75 * std::log(1.5), 1e-15);
    EXPECT_NEAR(relative_entropy(rho, sigma), kl, 1e-14);
    EXPECT_NEAR(relative_entropy(rho, sigma), 0.130812, 1e-6);
    EXPECT_NEAR(relative_entropy(BlochState::coin(0.25), BlochState::coin(0.5)), kl, 1e-14);
}

TEST(RelativeEntropy, MatchesMatrixLogarithmOracle) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; k++) {
        Vec3 a = testing::random_state(StateKind::Qubit, rng);
        Vec3 b = testing::random_state(StateKind::Qubit, rng, 0.999);
        const double oracle = matrix_relative_entropy(a, b);
        EXPECT_NEAR(relative_entropy(BlochState(StateKind::Qubit, a), BlochState(StateKind::Qubit, b)), oracle,
                    1e-10 * std::max(1.0, oracle));
    }
}

TEST(RelativeEntropy, RejectsMixedKinds) {
    BlochState a(StateKind::Rebit, Vec3{0.1, 0, 0});
    BlochState b(StateKind::Qubit, Vec3{0.1, 0, 0});
    try {
        relative_entropy(a, b);
        FAIL() << "expected KindMismatch";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::KindMismatch);
    }
}

TEST(BlochStateTest, RejectsUnphysicalAndClampsInsideSlack) {
    try {
        BlochState(StateKind::Rebit, Vec3{1.0, 0.1, 0});
        FAIL() << "expected UnphysicalArgument";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::UnphysicalArgument);
    }
    BlochState edge(StateKind::Rebit, Vec3{1.0 + 5e-13, 0, 0});
    EXPECT_LE(edge.radius(), 1.0);
    EXPECT_EQ(edge.eigenvalue_minus(), 0.0);
    EXPECT_THROW(check_physical(StateKind::Qubit, Vec3{0.8, 0.8, 0}), Error);
}

TEST(BlochStateTest, EigenvaluesSumToOne) {
    BlochState s(StateKind::Qubit, Vec3{0.3, 0.4, 0.0});
    EXPECT_NEAR(s.eigenvalue_plus(), 0.75, 1e-15);
    EXPECT_NEAR(s.eigenvalue_plus() + s.eigenvalue_minus(), 1.0, 1e-15);
}

TEST(Determinant, Examples) {
    EXPECT_DOUBLE_EQ(determinant(BlochState::maximally_mixed(StateKind::Rebit)), 0.25);
    EXPECT_DOUBLE_EQ(determinant(BlochState(StateKind::Qubit, Vec3{0, 1, 0})), 0.0);
    // Direct 2x2 determinant: ((1+z)(1-z) - (x^2+y^2))/4.
    const Vec3 r{0.36, 0.48, 0.0};
    const double direct = ((1 + r[2]) * (1 - r[2]) - (r[0] * r[0] + r[1] * r[1])) / 4.0;
    EXPECT_NEAR(direct, 0.16, 1e-15);
    EXPECT_NEAR(determinant(BlochState(StateKind::Rebit, r)), direct, 1e-15);
}

TEST(Entropy, MatchesSpectrum) {
    EXPECT_NEAR(entropy(BlochState::maximally_mixed(StateKind::Qubit)), std::numbers::ln2, 1e-15);
    EXPECT_EQ(entropy(BlochState(StateKind::Qubit, Vec3{0, 0, 1})), 0.0);
    EXPECT_NEAR(spectrum_entropy(0.5), -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)), 1e-15);
}

TEST(Sampler, SingleStateIsPhysicalAndDeterministic) {
    auto a = sample_hs_uniform(StateKind::Qubit, 1, 5);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_LE(a[0].radius(), 1.0);
    EXPECT_EQ(a, sample_hs_uniform(StateKind::Qubit, 1, 5));
    EXPECT_NE(a, sample_hs_uniform(StateKind::Qubit, 1, 6));
    for (const BlochState &s : sample_hs_uniform(StateKind::Rebit, 100, 1)) {
        EXPECT_EQ(s.r()[2], 0.0);
    }
}

TEST(Geometry, PolarRoundTripAndProjection) {
    const Vec3 r{0.3, -0.2, 0.5};
    const Vec3 back = from_polar(StateKind::Qubit, to_polar(StateKind::Qubit, r));
    EXPECT_NEAR(distance(back, r), 0.0, 1e-14);
    const Vec3 rb{0.3, -0.2, 0.0};
    EXPECT_NEAR(distance(from_polar(StateKind::Rebit, to_polar(StateKind::Rebit, rb)), rb), 0.0, 1e-14);
    const Vec3 p = project_to_ball(StateKind::Rebit, {3.0, 4.0, 7.0});
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], 0.8, 1e-15);
    EXPECT_EQ(p[2], 0.0);
}

TEST(Kinds, NamesRoundTrip) {
    for (StateKind k : {StateKind::Coin, StateKind::Rebit, StateKind::Qubit}) {
        EXPECT_EQ(kind_from_name(kind_name(k)), k);
    }
    EXPECT_THROW(kind_from_name("qutrit"), Error);
}

}  // namespace
}  // namespace tomomax
