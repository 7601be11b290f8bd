#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tomomax/estimators.h"
#include "tomomax/prior.h"
#include "tomomax/risk.h"

namespace tomomax {

/// Bayes risk of the posterior-mean estimator as a function of the prior weights
/// on a fixed set of supports.
///
/// With m_D = sum_i w_i Pr(D|i) and v_D = sum_i w_i Pr(D|i) r_i the value is
///   f(w) = sum_D h(m_D, v_D) - sum_i w_i S(rho_i),
///   h(m, v) = m log m - a log a - b log b,  a, b = (m +- |v|)/2,
/// which is concave in w. Its partial derivative in w_i is the pointwise risk of
/// the current Bayes estimator at support i.
class BayesRiskObjective {
   public:
    BayesRiskObjective(const ExperimentDesign &design, std::vector<Vec3> supports);

    const ExperimentDesign &design() const {
        return design_;
    }
    std::size_t size() const {
        return supports_.size();
    }
    const std::vector<Vec3> &supports() const {
        return supports_;
    }
    void set_support(std::size_t i, const Vec3 &r);

    double value(const std::vector<double> &weights) const;
    /// Value plus gradient (entries may be +inf where a support falls outside the
    /// range of a rank-deficient estimate).
    double value_and_gradient(const std::vector<double> &weights, std::vector<double> &gradient) const;

    /// Mixture statistics (m_D, v_D) for the given weights, in dataset order.
    struct Mixture {
        std::vector<double> mass;
        std::vector<double> moment;  // dim entries per dataset
        double entropy_term = 0.0;   // sum_i w_i S(rho_i)
    };
    Mixture mixture(const std::vector<double> &weights) const;
    /// f after moving support i to r with all weights unchanged; `base` must be
    /// the mixture of `weights` at the current supports.
    double value_with_move(const Mixture &base, const std::vector<double> &weights, std::size_t i, const Vec3 &r) const;

    /// Minus the Hessian of f restricted to the supports in `indices`, as a dense
    /// row-major |indices| x |indices| matrix. It is positive semidefinite.
    std::vector<double> negative_hessian(const std::vector<double> &weights, const std::vector<std::size_t> &indices) const;

   private:
    void fill_column(std::size_t i);
    double evaluate(const std::vector<double> &weights, std::vector<double> *gradient) const;

    ExperimentDesign design_;
    std::vector<Vec3> supports_;
    std::vector<double> entropies_;
    int dim_;
    std::vector<int> shots_;
    std::size_t rows_ = 1;
    // pmf_[b][n * K + i] = Pr(n_b = n | support i).
    std::vector<std::vector<double>> pmf_;
};

struct WeightSolverConfig {
    /// Stop when max_i g_i - f <= rel_tol * f. Inside the LFP searches a value
    /// <= 0 selects tol / 50.
    double rel_tol = 1e-6;
    int max_iterations = 200000;
    /// Once the multiplicative phase reaches this relative gap, switch to
    /// Newton steps on the supports carrying weight (0 disables them).
    double newton_switch = 1e-2;
    /// Newton steps are skipped when more supports than this carry weight.
    std::size_t newton_max_active = 2500;
};

struct WeightSolverResult {
    std::vector<double> weights;
    std::vector<double> gradient;  // pointwise risk of the Bayes estimator at each support
    double bayes_risk = 0.0;
    double gap = 0.0;  // max_i gradient_i - bayes_risk
    int iterations = 0;
    bool converged = false;
};

/// Maximizes the Bayes risk over the simplex by exponentiated-gradient ascent
/// with an adaptive step, falling back to projected gradient steps when the
/// multiplicative update stalls. Returns the best iterate with converged = false
/// when the tolerance is not met.
WeightSolverResult solve_weights(
    const BayesRiskObjective &objective, std::vector<double> init_weights, const WeightSolverConfig &config = {});

/// Convenience form over BlochStates; throws NonConvergence when the solver
/// stops short of the tolerance.
DiscretePrior maximize_weights(
    const std::vector<BlochState> &supports,
    const ExperimentDesign &design,
    std::vector<double> init_weights = {},
    const WeightSolverConfig &config = {});

struct LfpIteration {
    int iteration = 0;
    double av_risk = 0.0;
    double max_risk = 0.0;
    std::size_t support_count = 0;
};

enum class LfpStatus { Converged, IterationLimit };

struct LfpResult {
    DiscretePrior prior;
    TabulatedEstimator estimator;
    double av_risk = 0.0;
    double max_risk = 0.0;
    double gap = 0.0;  // (max_risk - av_risk) / av_risk
    Vec3 argmax{};
    int iterations = 0;
    double wall_seconds = 0.0;
    std::string algorithm;
    LfpStatus status = LfpStatus::Converged;
    std::vector<LfpIteration> history;
    std::vector<std::pair<std::string, double>> settings;
    std::uint64_t seed = 0;
    /// Generator state after the returned iteration (Monte Carlo only), for resuming.
    std::string rng_state;
};

using LfpCallback = std::function<void(const LfpResult &)>;

struct KempthorneConfig {
    double tol = 1e-3;
    /// Weight given to a newly added support; <= 0 selects 1/(count + 1).
    double mixing_alpha = 0.0;
    int max_iterations = 200;
    /// Alternations of weight solving and location search per iteration.
    int location_rounds = 8;
    WeightSolverConfig weights{0.0};
    MaxRiskConfig max_risk;
    double merge_distance = 1e-6;
    LfpCallback on_iteration;
};

/// Center plus a symmetric ring (rebit), octahedron (qubit) or both endpoints
/// (coin).
DiscretePrior default_initial_prior(StateKind kind);
/// As above, except that coin designs get about sqrt(N) evenly spaced points:
/// with fewer, the supports are told apart almost surely and the search stalls.
DiscretePrior default_initial_prior(const ExperimentDesign &design);

/// Deterministic least-favorable-prior search: optimize supports and weights,
/// certify with the max risk of the Bayes estimator, add a support at the risk
/// maximizer and repeat until the relative gap is at most tol.
LfpResult kempthorne_lfp(
    const ExperimentDesign &design,
    const std::optional<DiscretePrior> &init_prior = std::nullopt,
    const KempthorneConfig &config = {});

struct MonteCarloConfig {
    std::size_t n_init = 100;
    double tol = 1e-3;
    double weight_tol = 1e-4;
    int m_per_point = 5;
    /// Every survivor is kept, but only the heaviest max_parents spawn
    /// children; 0 lets all of them.
    std::size_t max_parents = 400;
    /// Gaussian scale for new supports; <= 0 selects 0.5/sqrt(N).
    double sigma = 0.0;
    std::uint64_t seed = 1;
    int max_iterations = 50;
    WeightSolverConfig weights{0.0};
    MaxRiskConfig max_risk;
    double merge_distance = 1e-6;
    LfpCallback on_iteration;
};

/// Monte Carlo search: random supports, optimal weights, pruning of light
/// supports and Gaussian resampling around the survivors. The returned prior is
/// the one whose certificate met the tolerance (or the best one seen), before
/// pruning.
LfpResult mc_lfp(const ExperimentDesign &design, const MonteCarloConfig &config = {});

/// Continues a Monte Carlo run from a checkpoint produced by mc_lfp (its prior,
/// iteration count and generator state).
LfpResult mc_lfp_resume(const ExperimentDesign &design, const LfpResult &checkpoint, const MonteCarloConfig &config);

/// (av_risk, max_risk): the minimax risk lies in this interval.
std::pair<double, double> minimax_certificate(const LfpResult &result);

/// Certificate of an arbitrary prior: its Bayes estimator, Bayes risk and the
/// estimator's max risk (never below the risk at any support).
LfpResult certify_prior(const DiscretePrior &prior, const ExperimentDesign &design, const MaxRiskConfig &config = {});

}  // namespace tomomax
