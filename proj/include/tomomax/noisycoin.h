#pragma once

#include <vector>

#include "tomomax/experiment.h"
#include "tomomax/prior.h"
#include "tomomax/qstate.h"

namespace tomomax {

/// Bernoulli(p) trials whose outcomes are flipped with known, trial-dependent
/// probabilities alpha_k in [0, 1/2): Pr(n_k = 1) = q_k = alpha_k + p(1 - 2 alpha_k).
class NoisyCoinModel {
   public:
    explicit NoisyCoinModel(std::vector<double> alphas);
    static NoisyCoinModel uniform(int n, double alpha);

    int size() const {
        return static_cast<int>(alphas_.size());
    }
    const std::vector<double> &alphas() const {
        return alphas_;
    }
    double q(std::size_t k, double p) const {
        return alphas_[k] + p * (1.0 - 2.0 * alphas_[k]);
    }
    /// Average resolution; +inf when some alpha_k is 0.
    double mean_resolution() const;

    /// Distinct alpha values (ascending) and how many trials share each.
    struct Group {
        double alpha;
        int count;
    };
    std::vector<Group> groups() const;

    /// Coin design with one basis per distinct alpha (visibility 1 - 2 alpha,
    /// shots = group size). Datasets of that design are the per-group counts of
    /// ones, a sufficient statistic for p.
    ExperimentDesign to_design() const;

   private:
    std::vector<double> alphas_;
};

/// Prior [delta(p - p0) + delta(p - p1)] / 2.
struct BimodalPrior {
    double p0;
    double p1;

    BimodalPrior(double p0, double p1);
    /// The same prior as a coin-kind DiscretePrior (r = 2p - 1).
    DiscretePrior as_discrete() const;
};

/// prod_k q_k^{n_k} (1 - q_k)^{1 - n_k}, computed in log space.
double coin_likelihood(const NoisyCoinModel &model, const std::vector<int> &outcomes, double p);
double coin_log_likelihood(const NoisyCoinModel &model, const std::vector<int> &outcomes, double p);

/// Posterior mean p1 / (1 + Lambda), Lambda = Pr(n|0) / Pr(n|p1), for a bimodal
/// prior with p0 = 0.
double bimodal_bayes_p(const NoisyCoinModel &model, const BimodalPrior &prior, const std::vector<int> &outcomes);

/// Exact pointwise risk E_{n|p}[KL(p || p_hat(n))] of the bimodal posterior mean
/// (p0 = 0). Outcome vectors are enumerated directly when N <= enumerate_limit,
/// otherwise through per-group counts.
double bimodal_pointwise_risk(
    const NoisyCoinModel &model, const BimodalPrior &prior, double p, int enumerate_limit = 20);

/// Exact Bayes risk of the bimodal prior: the average of the pointwise risk at p0 and p1.
double bimodal_bayes_risk(const NoisyCoinModel &model, const BimodalPrior &prior, int enumerate_limit = 20);

/// p1 = 1 / sqrt(beta_bar * N).
double default_p1(int n, double beta_bar);

/// Axis farthest from every Pauli measurement axis: (1,1)/sqrt2 (rebit),
/// (1,1,1)/sqrt3 (qubit), +1 (coin).
Vec3 least_favorable_axis(StateKind kind);

/// The two-point prior {pure state along psi, (1 - 2 p1) psi} with weights 1/2.
DiscretePrior qubit_bimodal_prior(StateKind kind, const Vec3 &psi_axis, double p1);

/// Posterior mean of qubit_bimodal_prior: [1 - 2 p1 Pr(n|rho1)/(Pr(n|rho0) + Pr(n|rho1))] psi.
BlochState qubit_bimodal_bayes(const ExperimentDesign &design, const Vec3 &psi_axis, double p1, const Dataset &dataset);

/// Noisy coins matched to a quantum design and an eigenbasis: one trial per shot
/// with alpha = effective noise of that shot's basis.
NoisyCoinModel matched_noisy_coin(const ExperimentDesign &design, const Vec3 &psi_axis);

/// e^{-1/2} / (2 sqrt(beta_bar) sqrt(N)).
double bound_noisy_coin(double n, double beta_bar);
/// (e^{-1/2}/4) sqrt(D - 1)/sqrt(N), D in {2, 3}.
double bound_pauli(double n, int d);
/// (2e)^{-3/2} / sqrt(N ln N), N >= 2.
double bound_haar(double n);
/// Mean resolution over alpha uniform on [1/(2N), 1 - 1/(2N)]:
/// [2 ln(2N - 1) - 4(1 - 1/N)] / (1 - 1/N).
double truncated_mean_resolution(double n);
/// 0.5 / N.
double classical_coin_reference(double n);

/// Hedged estimate in (0, 1). Noiseless models use (h + beta)/(N + 2 beta);
/// noisy ones maximize [p(1 - p)]^beta Pr(n|p).
double add_beta_estimator(const NoisyCoinModel &model, const std::vector<int> &outcomes, double beta);

}  // namespace tomomax
