#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "support.h"
#include "tomomax/serialization.h"

namespace tomomax {
namespace {

TEST(Numbers, RoundTripExactlyIncludingNonFinite) {
    for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, kInf, -kInf}) {
        const double back = number_from_json(parse_json(dump(number_to_json(x))));
        EXPECT_EQ(back, x);
        EXPECT_EQ(std::signbit(back), std::signbit(x));
    }
    EXPECT_TRUE(std::isnan(number_from_json(number_to_json(std::nan("")))));
    EXPECT_EQ(number_to_json(kInf), Json("inf"));
    EXPECT_THROW(number_from_json(Json("seven")), Error);
}

TEST(Numbers, FormatDoubleRoundTrips) {
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(kInf), "inf");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; i++) {
        const double x = u(rng);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
}

TEST(RoundTrip, StatesDesignsDatasets) {
    std::mt19937_64 rng(1);
    for (StateKind kind : {StateKind::Coin, StateKind::Rebit, StateKind::Qubit}) {
        const BlochState s(kind, testing::random_state(kind, rng));
        EXPECT_EQ(state_from_json(parse_json(dump(to_json(s)))), s);
        const ExperimentDesign d = ExperimentDesign::pauli(kind, 5);
        EXPECT_EQ(design_from_json(parse_json(dump(to_json(d)))), d);
    }
    const Dataset ds{{3, 0, 5}};
    EXPECT_EQ(dataset_from_json(to_json(ds)), ds);
    EXPECT_THROW(state_from_json(Json{{"kind", "rebit"}, {"r", {2.0, 0.0}}}), Error);
}

TEST(RoundTrip, PriorAndEstimator) {
    const DiscretePrior p = DiscretePrior::normalized(sample_hs_uniform(StateKind::Qubit, 7, 5), {1, 2, 3, 4, 5, 6, 7});
    const DiscretePrior back = prior_from_json(parse_json(dump(to_json(p))));
    EXPECT_EQ(back.supports(), p.supports());
    EXPECT_EQ(back.weights(), p.weights());

    const TabulatedEstimator t = tabulate_hml(ExperimentDesign::pauli(StateKind::Rebit, 6), 0.04);
    EXPECT_EQ(estimator_from_json(parse_json(dump(to_json(t)))), t);
    const TabulatedEstimator mle = tabulate_mle(ExperimentDesign::pauli(StateKind::Qubit, 2));
    EXPECT_EQ(estimator_from_json(parse_json(dump(to_json(mle)))), mle);
}

TEST(RoundTrip, CanonicalDumpIsStable) {
    const TabulatedEstimator t = tabulate_hml(ExperimentDesign::pauli(StateKind::Rebit, 4), 0.1);
    const std::string once = dump(to_json(t));
    EXPECT_EQ(dump(to_json(estimator_from_json(parse_json(once)))), once);
    EXPECT_EQ(once.back(), '\n');
}

TEST(RoundTrip, LfpResultReproducesRisks) {
    KempthorneConfig c;
    c.tol = 1e-2;
    c.max_risk.rebit_radial = 50;
    c.max_risk.rebit_angular = 90;
    const LfpResult r = kempthorne_lfp(ExperimentDesign::pauli_total(StateKind::Rebit, 4), std::nullopt, c);
    const LfpResult embedded = lfp_from_json(parse_json(dump(to_json(r))));
    EXPECT_EQ(embedded.estimator, r.estimator);
    EXPECT_EQ(embedded.prior.weights(), r.prior.weights());
    EXPECT_EQ(embedded.av_risk, r.av_risk);
    EXPECT_EQ(embedded.history.size(), r.history.size());
    auto sorted = [](std::vector<std::pair<std::string, double>> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    EXPECT_EQ(sorted(embedded.settings), sorted(r.settings));
    EXPECT_EQ(bayes_risk(embedded.prior, embedded.estimator), bayes_risk(r.prior, r.estimator));
    const BlochState probe(StateKind::Rebit, Vec3{0.3, -0.2, 0});
    EXPECT_EQ(pointwise_risk(embedded.estimator, probe), pointwise_risk(r.estimator, probe));

    // Separate estimator file resolved relative to the result's directory.
    const auto dir = std::filesystem::temp_directory_path() / "tomomax_serialization_test";
    std::filesystem::create_directories(dir);
    write_file_atomic((dir / "estimator.json").string(), dump(to_json(r.estimator)));
    write_file_atomic((dir / "lfp.json").string(), dump(to_json(r, "estimator.json")));
    const LfpResult split = lfp_from_json(parse_json(read_file((dir / "lfp.json").string())), dir.string());
    EXPECT_EQ(split.estimator, r.estimator);
    std::filesystem::remove_all(dir);
}

TEST(Files, ErrorsCarryIoCode) {
    try {
        read_file("/nonexistent/tomomax/file.json");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
    try {
        parse_json("{not json", "bad.json");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
    }
}

TEST(Csv, HeaderRowsAndInfinity) {
    const std::string csv = to_csv({"t", "a"}, {{0.0, 1.5}, {0.5, kInf}});
    EXPECT_EQ(csv, "t,a\n0,1.5\n0.5,inf\n");
}

}  // namespace
}  // namespace tomomax
