#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tomomax/estimators.h"
#include "tomomax/prior.h"

namespace tomomax {

/// Evaluates the exact pointwise risk sum_D Pr(D|rho) D(rho || rho_hat(D)) of one
/// tabulated estimator at many states.
///
/// -Tr rho log rho_hat is affine in rho's Bloch vector, so each table entry is
/// reduced once to an offset and a gradient; a risk evaluation is then one
/// weighted pass over the datasets. Rank-deficient entries are kept aside: they
/// contribute +inf whenever the dataset is possible and rho has weight outside
/// the entry's support.
class RiskEvaluator {
   public:
    explicit RiskEvaluator(const TabulatedEstimator &estimator);

    const ExperimentDesign &design() const {
        return layout_.design();
    }
    double operator()(const BlochState &rho) const;
    double operator()(const Vec3 &r) const;

   private:
    DatasetLayout layout_;
    int dim_;
    // Per dataset: -Tr rho log rho_hat = offset + r . slope.
    std::vector<double> offset_;
    std::vector<double> slope_;
    // Per dataset: unit eigenvector of a pure estimate, or NaN in [0] when full rank.
    std::vector<Vec3> pure_axis_;
    bool has_pure_ = false;
};

/// Exact pointwise risk in nats; +inf on support violation.
double pointwise_risk(const TabulatedEstimator &estimator, const BlochState &rho);

/// sum_i w_i * pointwise_risk(estimator, rho_i).
double bayes_risk(const DiscretePrior &prior, const TabulatedEstimator &estimator);

struct MaxRiskConfig {
    int rebit_radial = 200;
    int rebit_angular = 360;
    int qubit_directions = 400;
    int qubit_shells = 100;
    int coin_points = 4001;
    int refine_top = 10;
    double refine_min_step = 1e-7;
};

struct MaxRiskResult {
    double value = 0.0;
    Vec3 argmax{};
};

/// Grid search over the state space followed by coordinate-ascent refinement of
/// the best grid points. The value is a lower bound on the true maximum.
MaxRiskResult max_risk(const TabulatedEstimator &estimator, const MaxRiskConfig &config = {});
MaxRiskResult max_risk(const RiskEvaluator &evaluator, const MaxRiskConfig &config = {});

/// Risk at r = t * axis for t uniform on [0, 1] (num_points >= 2).
std::vector<std::pair<double, double>> risk_profile(
    const TabulatedEstimator &estimator, const Vec3 &axis, int num_points);

struct RiskReport {
    double pointwise_max = 0.0;
    Vec3 argmax_state{};
    std::optional<double> bayes_risk;
    std::vector<std::pair<double, double>> profile;
    ExperimentDesign design;
    std::string provenance;
};

RiskReport make_risk_report(
    const TabulatedEstimator &estimator,
    const MaxRiskConfig &config,
    const DiscretePrior *prior = nullptr,
    const Vec3 *profile_axis = nullptr,
    int profile_points = 200);

}  // namespace tomomax
