#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "tomomax/experiment.h"
#include "tomomax/prior.h"
#include "tomomax/qstate.h"

namespace tomomax {

using Estimate = std::variant<BlochState, UnphysicalPoint>;

/// Bloch vector of either alternative.
const Vec3 &estimate_vector(const Estimate &estimate);

/// Solves axis_b . r = 2 n_b / M_b - 1 (shot-weighted least squares for
/// overcomplete designs). Returns an UnphysicalPoint when |r| > 1.
Estimate linear_inversion(const ExperimentDesign &design, const Dataset &dataset);

/// Maximum-likelihood state. Returns the linear-inversion point exactly when the
/// axes are orthonormal and that point is physical; otherwise maximizes
/// numerically (the maximizer then lies on |r| = 1 for complete designs).
BlochState mle(const ExperimentDesign &design, const Dataset &dataset);

/// Hedged maximum likelihood: argmax det(rho)^beta * L(rho). Always |r| < 1.
BlochState hml(const ExperimentDesign &design, const Dataset &dataset, double beta);

/// Log of the hedged likelihood up to a data-dependent constant
/// (sum_b n_b log q_b + (M_b - n_b) log(1 - q_b) + beta log(1 - |r|^2)).
double hedged_log_objective(const ExperimentDesign &design, const Dataset &dataset, const Vec3 &r, double beta);

/// Posterior mean of a discrete prior. Throws ZeroEvidence when every support
/// assigns the dataset probability zero.
BlochState bayes_mean(const DiscretePrior &prior, const ExperimentDesign &design, const Dataset &dataset);

/// Explicit map from every dataset (lexicographic index) to an estimate.
class TabulatedEstimator {
   public:
    TabulatedEstimator(
        ExperimentDesign design, std::vector<Vec3> entries, std::string provenance, bool allow_unphysical = false);

    const ExperimentDesign &design() const {
        return design_;
    }
    std::size_t size() const {
        return entries_.size();
    }
    const std::vector<Vec3> &entries() const {
        return entries_;
    }
    const Vec3 &entry(std::size_t index) const {
        return entries_[index];
    }
    const std::string &provenance() const {
        return provenance_;
    }
    bool allow_unphysical() const {
        return allow_unphysical_;
    }
    /// True when every entry satisfies |r| <= 1 + kPhysSlack.
    bool all_physical() const;
    Estimate estimate(const Dataset &dataset) const;

    bool operator==(const TabulatedEstimator &other) const = default;

   private:
    ExperimentDesign design_;
    std::vector<Vec3> entries_;
    std::string provenance_;
    bool allow_unphysical_ = false;
};

using EstimatorFn = std::function<Estimate(const Dataset &)>;

/// Applies `fn` to every dataset. Unphysical results are accepted only with
/// `allow_unphysical`.
TabulatedEstimator tabulate(
    const EstimatorFn &fn,
    const ExperimentDesign &design,
    std::string provenance,
    bool allow_unphysical = false,
    std::uint64_t cap = kDefaultDatasetCap);

TabulatedEstimator tabulate_linear_inversion(const ExperimentDesign &design, std::uint64_t cap = kDefaultDatasetCap);
TabulatedEstimator tabulate_mle(const ExperimentDesign &design, std::uint64_t cap = kDefaultDatasetCap);
TabulatedEstimator tabulate_hml(const ExperimentDesign &design, double beta, std::uint64_t cap = kDefaultDatasetCap);
TabulatedEstimator tabulate_constant(const ExperimentDesign &design, const BlochState &state);

/// Bayes (posterior-mean) estimator of a prior, computed in log space for every
/// dataset.
TabulatedEstimator tabulate_bayes(
    const DiscretePrior &prior,
    const ExperimentDesign &design,
    std::string provenance = "posterior mean",
    std::uint64_t cap = kDefaultDatasetCap);

}  // namespace tomomax
