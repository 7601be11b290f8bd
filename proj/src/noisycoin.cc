#include "tomomax/noisycoin.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "tomomax/compensated_sum.h"
#include "tomomax/optimize.h"

namespace tomomax {

NoisyCoinModel::NoisyCoinModel(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    if (alphas_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "a noisy coin model needs at least one trial");
    }
    for (double a : alphas_) {
        if (!(a >= 0.0 && a < 0.5)) {
            throw Error(ErrorCode::InvalidArgument, "error probabilities must lie in [0, 1/2)");
        }
    }
}

NoisyCoinModel NoisyCoinModel::uniform(int n, double alpha) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
    }
    return NoisyCoinModel(std::vector<double>(static_cast<std::size_t>(n), alpha));
}

double NoisyCoinModel::mean_resolution() const {
    CompensatedSum sum;
    for (double a : alphas_) {
        sum += resolution(a);
    }
    return sum.value() / static_cast<double>(alphas_.size());
}

std::vector<NoisyCoinModel::Group> NoisyCoinModel::groups() const {
    std::map<double, int> counts;
    for (double a : alphas_) {
        counts[a]++;
    }
    std::vector<Group> out;
    for (const auto &[alpha, count] : counts) {
        out.push_back({alpha, count});
    }
    return out;
}

ExperimentDesign NoisyCoinModel::to_design() const {
    std::vector<Vec3> axes;
    std::vector<int> shots;
    for (const Group &g : groups()) {
        axes.push_back({1.0 - 2.0 * g.alpha, 0, 0});
        shots.push_back(g.count);
    }
    return ExperimentDesign(StateKind::Coin, std::move(axes), std::move(shots));
}

BimodalPrior::BimodalPrior(double p0_, double p1_) : p0(p0_), p1(p1_) {
    if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "bimodal prior points must lie in [0, 1]");
    }
    if (p0 == p1) {
        throw Error(ErrorCode::InvalidArgument, "bimodal prior points must differ");
    }
}

DiscretePrior BimodalPrior::as_discrete() const {
    return DiscretePrior({BlochState::coin(p0), BlochState::coin(p1)}, {0.5, 0.5});
}

namespace {

// n log q with 0 log 0 = 0.
double count_log(double n, double q) {
    if (n == 0.0) {
        return 0.0;
    }
    return q > 0.0 ? n * std::log(q) : -kInf;
}

void check_outcomes(const NoisyCoinModel &model, const std::vector<int> &outcomes) {
    if (outcomes.size() != model.alphas().size()) {
        throw Error(ErrorCode::ShapeMismatch, "outcome vector length differs from the model size");
    }
    for (int n : outcomes) {
        if (n != 0 && n != 1) {
            throw Error(ErrorCode::InvalidArgument, "outcomes must be 0 or 1");
        }
    }
}

double kl_bernoulli(double p, double p_hat) {
    double out = 0.0;
    if (p > 0.0) {
        if (p_hat <= 0.0) {
            return kInf;
        }
        out += p * std::log(p / p_hat);
    }
    if (p < 1.0) {
        if (p_hat >= 1.0) {
            return kInf;
        }
        out += (1.0 - p) * std::log((1.0 - p) / (1.0 - p_hat));
    }
    return out;
}

// p1 / (1 + exp(l0 - l1)) from the log-likelihoods at 0 and p1.
double posterior_mean_from_logs(double p1, double l0, double l1) {
    if (l0 == -kInf && l1 == -kInf) {
        throw Error(ErrorCode::ZeroEvidence, "outcomes are impossible under both prior points");
    }
    if (l1 == -kInf) {
        return 0.0;
    }
    if (l0 == -kInf) {
        return p1;
    }
    double x = l0 - l1;
    return x > 0.0 ? p1 * std::exp(-x) / (1.0 + std::exp(-x)) : p1 / (1.0 + std::exp(x));
}

void check_bimodal_at_zero(const BimodalPrior &prior) {
    if (prior.p0 != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "the likelihood-ratio form requires p0 = 0");
    }
}

}  // namespace

double coin_log_likelihood(const NoisyCoinModel &model, const std::vector<int> &outcomes, double p) {
    check_outcomes(model, outcomes);
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); k++) {
        double q = model.q(k, p);
        total += outcomes[k] == 1 ? count_log(1.0, q) : count_log(1.0, 1.0 - q);
    }
    return total;
}

double coin_likelihood(const NoisyCoinModel &model, const std::vector<int> &outcomes, double p) {
    return std::exp(coin_log_likelihood(model, outcomes, p));
}

double bimodal_bayes_p(const NoisyCoinModel &model, const BimodalPrior &prior, const std::vector<int> &outcomes) {
    check_bimodal_at_zero(prior);
    return posterior_mean_from_logs(
        prior.p1, coin_log_likelihood(model, outcomes, 0.0), coin_log_likelihood(model, outcomes, prior.p1));
}

double bimodal_pointwise_risk(const NoisyCoinModel &model, const BimodalPrior &prior, double p, int enumerate_limit) {
    check_bimodal_at_zero(prior);
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
    }
    const int n = model.size();
    CompensatedSum total;
    if (n <= enumerate_limit && n < 63) {
        std::vector<int> outcomes(static_cast<std::size_t>(n));
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); mask++) {
            for (int k = 0; k < n; k++) {
                outcomes[static_cast<std::size_t>(k)] = static_cast<int>((mask >> k) & 1u);
            }
            double lp = coin_log_likelihood(model, outcomes, p);
            if (lp == -kInf) {
                continue;
            }
            double p_hat = bimodal_bayes_p(model, prior, outcomes);
            total += std::exp(lp) * kl_bernoulli(p, p_hat);
        }
        return total.value();
    }

    // Per-group counts of ones are sufficient; enumerate them as an odometer.
    const std::vector<NoisyCoinModel::Group> groups = model.groups();
    const std::size_t ng = groups.size();
    std::vector<int> c(ng, 0);
    while (true) {
        double log_mult = 0.0;
        double lp = 0.0;
        double l0 = 0.0;
        double l1 = 0.0;
        for (std::size_t g = 0; g < ng; g++) {
            const double a = groups[g].alpha;
            const double m = groups[g].count;
            const double k = c[g];
            log_mult += std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
            auto ll = [&](double pp) {
                double q = a + pp * (1.0 - 2.0 * a);
                return count_log(k, q) + count_log(m - k, 1.0 - q);
            };
            lp += ll(p);
            l0 += ll(0.0);
            l1 += ll(prior.p1);
        }
        if (lp != -kInf) {
            double p_hat = posterior_mean_from_logs(prior.p1, l0, l1);
            total += std::exp(log_mult + lp) * kl_bernoulli(p, p_hat);
        }
        std::size_t g = 0;
        for (; g < ng; g++) {
            if (++c[g] <= groups[g].count) {
                break;
            }
            c[g] = 0;
        }
        if (g == ng) {
            break;
        }
    }
    return total.value();
}

double bimodal_bayes_risk(const NoisyCoinModel &model, const BimodalPrior &prior, int enumerate_limit) {
    return 0.5 * (bimodal_pointwise_risk(model, prior, prior.p0, enumerate_limit) +
                  bimodal_pointwise_risk(model, prior, prior.p1, enumerate_limit));
}

double default_p1(int n, double beta_bar) {
    if (n < 1 || !(beta_bar > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "N must be positive and beta_bar positive");
    }
    return 1.0 / std::sqrt(beta_bar * n);
}

Vec3 least_favorable_axis(StateKind kind) {
    switch (kind) {
        case StateKind::Coin:
            return {1, 0, 0};
        case StateKind::Rebit:
            return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0};
        case StateKind::Qubit:
            return {std::numbers::inv_sqrt3, std::numbers::inv_sqrt3, std::numbers::inv_sqrt3};
    }
    return {};
}

namespace {

void check_bimodal_args(const Vec3 &psi_axis, double p1) {
    if (std::fabs(norm(psi_axis) - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "psi axis must be a unit vector");
    }
    if (!(p1 > 0.0 && p1 < 0.5)) {
        throw Error(ErrorCode::InvalidArgument, "p1 must lie in (0, 1/2)");
    }
}

}  // namespace

DiscretePrior qubit_bimodal_prior(StateKind kind, const Vec3 &psi_axis, double p1) {
    check_bimodal_args(psi_axis, p1);
    return DiscretePrior({BlochState(kind, psi_axis), BlochState(kind, (1.0 - 2.0 * p1) * psi_axis)}, {0.5, 0.5});
}

BlochState qubit_bimodal_bayes(const ExperimentDesign &design, const Vec3 &psi_axis, double p1, const Dataset &dataset) {
    check_bimodal_args(psi_axis, p1);
    const StateKind kind = design.kind();
    double l0 = log_likelihood(design, dataset, BlochState(kind, psi_axis));
    double l1 = log_likelihood(design, dataset, BlochState(kind, (1.0 - 2.0 * p1) * psi_axis));
    if (l0 == -kInf && l1 == -kInf) {
        throw Error(ErrorCode::ZeroEvidence, "dataset is impossible under both prior states");
    }
    // Pr(n|rho1) / (Pr(n|rho0) + Pr(n|rho1)).
    double share = l0 == -kInf ? 1.0 : (l1 == -kInf ? 0.0 : 1.0 / (1.0 + std::exp(l0 - l1)));
    return BlochState(kind, (1.0 - 2.0 * p1 * share) * psi_axis);
}

NoisyCoinModel matched_noisy_coin(const ExperimentDesign &design, const Vec3 &psi_axis) {
    std::vector<double> alphas;
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        double overlap = std::fabs(dot(design.axis(b), psi_axis));
        double alpha = 0.5 * (1.0 - overlap);
        if (!(alpha < 0.5)) {
            throw Error(ErrorCode::InvalidArgument, "a measurement axis is orthogonal to psi");
        }
        alphas.insert(alphas.end(), static_cast<std::size_t>(design.shots(b)), alpha);
    }
    return NoisyCoinModel(std::move(alphas));
}

double bound_noisy_coin(double n, double beta_bar) {
    if (!(n >= 1.0) || !(beta_bar > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "bound needs N >= 1 and beta_bar > 0");
    }
    return std::exp(-0.5) / (2.0 * std::sqrt(beta_bar) * std::sqrt(n));
}

double bound_pauli(double n, int d) {
    if (d != 2 && d != 3) {
        throw Error(ErrorCode::InvalidArgument, "D must be 2 (rebit) or 3 (qubit)");
    }
    return bound_noisy_coin(n, 4.0 / (d - 1));
}

double bound_haar(double n) {
    if (!(n >= 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "bound needs N >= 2");
    }
    return std::pow(2.0 * std::numbers::e, -1.5) / std::sqrt(n * std::log(n));
}

double truncated_mean_resolution(double n) {
    if (!(n >= 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "N must be at least 2");
    }
    double width = 1.0 - 1.0 / n;
    return (2.0 * std::log(2.0 * n - 1.0) - 4.0 * width) / width;
}

double classical_coin_reference(double n) {
    if (!(n >= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "N must be at least 1");
    }
    return 0.5 / n;
}

double add_beta_estimator(const NoisyCoinModel &model, const std::vector<int> &outcomes, double beta) {
    check_outcomes(model, outcomes);
    if (!(beta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    }
    bool noiseless = std::all_of(model.alphas().begin(), model.alphas().end(), [](double a) { return a == 0.0; });
    if (noiseless) {
        int heads = 0;
        for (int o : outcomes) {
            heads += o;
        }
        return (heads + beta) / (model.size() + 2.0 * beta);
    }
    auto objective = [&](double p) {
        if (p <= 0.0 || p >= 1.0) {
            return -kInf;
        }
        return beta * (std::log(p) + std::log1p(-p)) + coin_log_likelihood(model, outcomes, p);
    };
    return golden_section_max(objective, 0.0, 1.0, 1e-13);
}

}  // namespace tomomax
