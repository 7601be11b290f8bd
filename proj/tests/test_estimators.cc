#include <gtest/gtest.h>

#include <cmath>

#include "support.h"
#include "tomomax/estimators.h"
#include "tomomax/noisycoin.h"
#include "tomomax/parallel.h"

namespace tomomax {
namespace {

const ExperimentDesign kRebit8 = ExperimentDesign::pauli(StateKind::Rebit, 8);

TEST(LinearInversion, Examples) {
    auto center = linear_inversion(kRebit8, Dataset{{4, 4}});
    ASSERT_TRUE(std::holds_alternative<BlochState>(center));
    EXPECT_EQ(estimate_vector(center), (Vec3{0, 0, 0}));
    auto corner = linear_inversion(kRebit8, Dataset{{8, 8}});
    ASSERT_TRUE(std::holds_alternative<UnphysicalPoint>(corner));
    EXPECT_NEAR(std::get<UnphysicalPoint>(corner).radius(), std::sqrt(2.0), 1e-15);
    auto q = linear_inversion(ExperimentDesign::pauli(StateKind::Qubit, 4), Dataset{{4, 2, 2}});
    EXPECT_EQ(estimate_vector(q), (Vec3{1, 0, 0}));
}

TEST(LinearInversion, TableAtM1) {
    auto t = tabulate_linear_inversion(ExperimentDesign::pauli(StateKind::Rebit, 1));
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t.entry(0), (Vec3{-1, -1, 0}));
    EXPECT_EQ(t.entry(1), (Vec3{-1, 1, 0}));
    EXPECT_EQ(t.entry(2), (Vec3{1, -1, 0}));
    EXPECT_EQ(t.entry(3), (Vec3{1, 1, 0}));
    EXPECT_TRUE(t.allow_unphysical());
    EXPECT_FALSE(t.all_physical());
}

TEST(LinearInversion, OvercompleteDesignUsesLeastSquares) {
    const double s = 1 / std::sqrt(2.0);
    ExperimentDesign d(StateKind::Rebit, {{1, 0, 0}, {0, 1, 0}, {s, s, 0}}, {4, 4, 4});
    // Frequencies are inconsistent across the three axes; the estimate must
    // satisfy the shot-weighted normal equations.
    const Dataset ds{{3, 2, 3}};
    const Vec3 est = estimate_vector(linear_inversion(d, ds));
    double grad[2] = {0, 0};
    for (std::size_t b = 0; b < 3; b++) {
        const double resid = dot(d.axis(b), est) - (2.0 * ds.counts[b] / 4.0 - 1.0);
        grad[0] += d.shots(b) * resid * d.axis(b)[0];
        grad[1] += d.shots(b) * resid * d.axis(b)[1];
    }
    EXPECT_NEAR(grad[0], 0.0, 1e-12);
    EXPECT_NEAR(grad[1], 0.0, 1e-12);
}

TEST(Mle, InteriorEqualsLinearInversion) {
    EXPECT_EQ(mle(kRebit8, Dataset{{6, 4}}).r(), (Vec3{0.5, 0, 0}));
    for (const Dataset &ds : enumerate_datasets(kRebit8)) {
        auto li = linear_inversion(kRebit8, ds);
        if (std::holds_alternative<BlochState>(li)) {
            EXPECT_LT(distance(mle(kRebit8, ds).r(), estimate_vector(li)), 1e-9);
        }
    }
}

TEST(Mle, BoundaryMaximizersMatchGridOracle) {
    for (auto [nx, ny] : {std::pair{8, 8}, std::pair{8, 4}, std::pair{7, 8}, std::pair{0, 1}, std::pair{8, 6}}) {
        const Vec3 oracle = testing::rebit_grid_argmax(8, nx, ny, 0.0, 1000000);
        const BlochState est = mle(kRebit8, Dataset{{nx, ny}});
        EXPECT_NEAR(distance(est.r(), oracle), 0.0, 1e-4) << nx << "," << ny;
        EXPECT_NEAR(est.radius(), 1.0, 1e-12);
    }
    EXPECT_NEAR(distance(mle(kRebit8, Dataset{{8, 4}}).r(), Vec3{1, 0, 0}), 0.0, 1e-9);
}

TEST(Hml, CenterAndInterior) {
    for (double beta : {0.01, 0.04, 1.0}) {
        EXPECT_LT(hml(kRebit8, Dataset{{4, 4}}, beta).radius(), 1e-9);
    }
    for (auto [nx, ny] : {std::pair{8, 8}, std::pair{8, 4}, std::pair{3, 8}, std::pair{6, 5}}) {
        const BlochState est = hml(kRebit8, Dataset{{nx, ny}}, 0.04);
        EXPECT_LT(est.radius(), 1.0);
        const Vec3 oracle = testing::rebit_grid_argmax(8, nx, ny, 0.04, 1000000);
        EXPECT_NEAR(distance(est.r(), oracle), 0.0, 1e-4) << nx << "," << ny;
        // Not worse than the oracle's point in the objective.
        EXPECT_GE(hedged_log_objective(kRebit8, Dataset{{nx, ny}}, est.r(), 0.04),
                  hedged_log_objective(kRebit8, Dataset{{nx, ny}}, oracle, 0.04) - 1e-9);
    }
}

TEST(Hml, TableIsInteriorAndMatchesOracle) {
    auto t = tabulate_hml(kRebit8, 0.04);
    ASSERT_EQ(t.size(), 81u);
    for (std::size_t i = 0; i < t.size(); i++) {
        EXPECT_LT(norm(t.entry(i)), 1.0);
        const Dataset ds = dataset_at(kRebit8, i);
        const Vec3 oracle = testing::rebit_grid_argmax(8, ds.counts[0], ds.counts[1], 0.04, 40000);
        EXPECT_NEAR(distance(t.entry(i), oracle), 0.0, 1e-4) << i;
    }
}

TEST(Hml, InteriorForEveryBetaAndKind) {
    for (StateKind kind : {StateKind::Rebit, StateKind::Qubit}) {
        auto d = ExperimentDesign::pauli(kind, kind == StateKind::Rebit ? 16 : 4);
        for (double beta : {1e-3, 0.04, 0.5}) {
            double margin = kInf;
            for (const Vec3 &r : tabulate_hml(d, beta).entries()) {
                margin = std::min(margin, 1.0 - norm(r));
            }
            EXPECT_GT(margin, 0.0);
        }
    }
}

TEST(Hml, ApproachesMleAsBetaVanishes) {
    const Dataset ds{{6, 3}};
    const Vec3 target = mle(kRebit8, ds).r();
    double prev = kInf;
    for (double beta : {0.1, 0.01, 0.001, 1e-5}) {
        const double gap = distance(hml(kRebit8, ds, beta).r(), target);
        EXPECT_LT(gap, prev);
        prev = gap;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(BayesMean, PointPriorIsConstant) {
    const BlochState s(StateKind::Rebit, Vec3{0.3, 0.1, 0});
    auto t = tabulate_bayes(DiscretePrior::point(s), kRebit8);
    for (const Vec3 &r : t.entries()) {
        EXPECT_NEAR(distance(r, s.r()), 0.0, 1e-15);
    }
    EXPECT_EQ(bayes_mean(DiscretePrior::point(s), kRebit8, Dataset{{0, 8}}), s);
}

TEST(BayesMean, EqualEvidenceGivesMidpoint) {
    // Mirror images in X: the dataset with n_x = M/2 cannot tell them apart.
    DiscretePrior p = DiscretePrior::uniform(
        {BlochState(StateKind::Rebit, Vec3{0.6, 0.2, 0}), BlochState(StateKind::Rebit, Vec3{-0.6, 0.2, 0})});
    const BlochState est = bayes_mean(p, kRebit8, Dataset{{4, 5}});
    EXPECT_NEAR(est.r()[0], 0.0, 1e-15);
    EXPECT_NEAR(est.r()[1], 0.2, 1e-15);
}

TEST(BayesMean, DirectWeightedAverage) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; trial++) {
        std::vector<BlochState> s;
        std::vector<double> w;
        for (int i = 0; i < 4; i++) {
            s.emplace_back(StateKind::Qubit, testing::random_state(StateKind::Qubit, rng));
            w.push_back(0.25);
        }
        DiscretePrior p(s, w);
        auto d = ExperimentDesign::pauli(StateKind::Qubit, 3);
        const Dataset ds = dataset_at(d, static_cast<std::uint64_t>(trial * 3));
        Vec3 num{};
        double den = 0.0;
        for (int i = 0; i < 4; i++) {
            std::vector<double> q;
            for (std::size_t b = 0; b < 3; b++) {
                q.push_back(0.5 * (1 + s[static_cast<std::size_t>(i)].r()[b]));
            }
            const double l = testing::binomial_likelihood(d.shots(), ds.counts, q);
            num = num + (0.25 * l) * s[static_cast<std::size_t>(i)].r();
            den += 0.25 * l;
        }
        EXPECT_NEAR(distance(bayes_mean(p, d, ds).r(), (1.0 / den) * num), 0.0, 1e-12);
    }
}

TEST(BayesMean, BimodalCoinPosteriorMean) {
    // p0 = 0, p1: the posterior mean is p1 / (1 + Lambda).
    const double p1 = 0.2;
    NoisyCoinModel model = NoisyCoinModel::uniform(6, 0.1);
    const ExperimentDesign d = model.to_design();
    BimodalPrior prior(0.0, p1);
    for (int h = 0; h <= 6; h++) {
        const double l0 = testing::binomial_likelihood({6}, {h}, {0.1});
        const double l1 = testing::binomial_likelihood({6}, {h}, {0.1 + p1 * 0.8});
        const double p_hat = p1 / (1.0 + l0 / l1);
        const BlochState est = bayes_mean(prior.as_discrete(), d, Dataset{{h}});
        EXPECT_NEAR(0.5 * (1 + est.r()[0]), p_hat, 1e-12);
    }
}

TEST(BayesMean, ZeroEvidence) {
    DiscretePrior p = DiscretePrior::point(BlochState(StateKind::Rebit, Vec3{1, 0, 0}));
    try {
        bayes_mean(p, kRebit8, Dataset{{3, 4}});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroEvidence);
    }
}

TEST(Tabulate, RejectsUnphysicalUnlessAllowed) {
    EstimatorFn li = [](const Dataset &ds) { return linear_inversion(kRebit8, ds); };
    EXPECT_THROW(tabulate(li, kRebit8, "li"), Error);
    EXPECT_NO_THROW(tabulate(li, kRebit8, "li", true));
    try {
        tabulate_hml(ExperimentDesign::pauli(StateKind::Qubit, 300), 0.04);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::CapExceeded);
    }
    EXPECT_THROW(TabulatedEstimator(kRebit8, std::vector<Vec3>(80), "short"), Error);
}

TEST(Tabulate, ParallelTablesMatchSerial) {
    auto d = ExperimentDesign::pauli(StateKind::Rebit, 24);
    set_thread_count(1);
    auto serial = tabulate_hml(d, 0.04);
    set_thread_count(4);
    auto parallel = tabulate_hml(d, 0.04);
    set_thread_count(0);
    EXPECT_EQ(serial, parallel);
}

TEST(Properties, Equivariance) {
    EXPECT_EQ(testing::check_estimator_equivariance(5), "");
}

}  // namespace
}  // namespace tomomax
