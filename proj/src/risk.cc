#include "tomomax/risk.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tomomax/compensated_sum.h"
#include "tomomax/parallel.h"

namespace tomomax {

RiskEvaluator::RiskEvaluator(const TabulatedEstimator &estimator)
    : layout_(estimator.design(), UINT64_MAX), dim_(dimension(estimator.design().kind())) {
    const std::size_t n = estimator.size();
    offset_.resize(n);
    slope_.resize(n * static_cast<std::size_t>(dim_));
    pure_axis_.assign(n, Vec3{std::nan(""), 0, 0});
    for (std::size_t i = 0; i < n; i++) {
        const Vec3 &b = estimator.entry(i);
        double len = norm(b);
        if (len > 1.0 + kPhysSlack) {
            throw Error(ErrorCode::UnphysicalArgument, "risk is undefined for tables with unphysical entries");
        }
        double *slope = slope_.data() + i * dim_;
        if (len == 0.0) {
            offset_[i] = std::numbers::ln2;
            std::fill(slope, slope + dim_, 0.0);
            continue;
        }
        Vec3 axis = (1.0 / len) * b;
        double mu_plus = 0.5 * (1.0 + std::min(len, 1.0));
        double mu_minus = 0.5 * (1.0 - std::min(len, 1.0));
        if (mu_minus <= 0.0) {
            // Pure estimate: the mu_plus term vanishes (log 1 = 0); the null direction is tracked separately.
            offset_[i] = 0.0;
            std::fill(slope, slope + dim_, 0.0);
            pure_axis_[i] = axis;
            has_pure_ = true;
            continue;
        }
        double lp = std::log(mu_plus);
        double lm = std::log(mu_minus);
        offset_[i] = -0.5 * (lp + lm);
        for (int k = 0; k < dim_; k++) {
            slope[k] = -0.5 * (lp - lm) * axis[k];
        }
    }
}

double RiskEvaluator::operator()(const BlochState &rho) const {
    if (rho.kind() != layout_.design().kind()) {
        throw Error(ErrorCode::DesignMismatch, "state kind differs from the estimator's design");
    }
    return (*this)(rho.r());
}

double RiskEvaluator::operator()(const Vec3 &r) const {
    std::vector<double> pmfs(layout_.pmf_size());
    layout_.fill_pmfs(r, pmfs.data());
    CompensatedSum acc;
    bool infinite = false;
    const int d = dim_;
    const double *offset = offset_.data();
    const double *slope = slope_.data();
    if (!has_pure_) {
        layout_.for_each_weight(pmfs.data(), [&](std::size_t idx, double w) {
            if (w == 0.0) {
                return;
            }
            const double *s = slope + idx * d;
            double term = offset[idx];
            for (int k = 0; k < d; k++) {
                term += r[k] * s[k];
            }
            acc += w * term;
        });
    } else {
        layout_.for_each_weight(pmfs.data(), [&](std::size_t idx, double w) {
            if (w == 0.0 || infinite) {
                return;
            }
            const Vec3 &pure = pure_axis_[idx];
            if (!std::isnan(pure[0])) {
                if (0.5 * (1.0 - dot(r, pure)) > 1e-14) {
                    infinite = true;
                }
                return;
            }
            const double *s = slope + idx * d;
            double term = offset[idx];
            for (int k = 0; k < d; k++) {
                term += r[k] * s[k];
            }
            acc += w * term;
        });
    }
    if (infinite) {
        return kInf;
    }
    double radius = std::min(1.0, norm(r));
    return std::max(0.0, acc.value() - spectrum_entropy(radius));
}

double pointwise_risk(const TabulatedEstimator &estimator, const BlochState &rho) {
    return RiskEvaluator(estimator)(rho);
}

double bayes_risk(const DiscretePrior &prior, const TabulatedEstimator &estimator) {
    if (prior.kind() != estimator.design().kind()) {
        throw Error(ErrorCode::DesignMismatch, "prior kind differs from the estimator's design");
    }
    RiskEvaluator eval(estimator);
    CompensatedSum total;
    for (std::size_t i = 0; i < prior.size(); i++) {
        if (prior.weight(i) == 0.0) {
            continue;
        }
        total += prior.weight(i) * eval(prior.support(i));
    }
    return total.value();
}

namespace {

struct GridPoint {
    Vec3 params;
    double value;
};

}  // namespace

MaxRiskResult max_risk(const TabulatedEstimator &estimator, const MaxRiskConfig &config) {
    return max_risk(RiskEvaluator(estimator), config);
}

MaxRiskResult max_risk(const RiskEvaluator &evaluator, const MaxRiskConfig &config) {
    const StateKind kind = evaluator.design().kind();
    std::vector<GridPoint> grid;
    Vec3 steps{};
    switch (kind) {
        case StateKind::Coin: {
            int n = std::max(config.coin_points, 2);
            for (int i = 0; i < n; i++) {
                grid.push_back({{-1.0 + 2.0 * i / (n - 1), 0, 0}, 0.0});
            }
            steps = {2.0 / (n - 1), 0, 0};
            break;
        }
        case StateKind::Rebit: {
            int nr = std::max(config.rebit_radial, 2);
            int na = std::max(config.rebit_angular, 1);
            grid.push_back({{0, 0, 0}, 0.0});
            for (int i = 1; i < nr; i++) {
                for (int k = 0; k < na; k++) {
                    grid.push_back({{static_cast<double>(i) / (nr - 1), 2.0 * std::numbers::pi * k / na, 0}, 0.0});
                }
            }
            steps = {1.0 / (nr - 1), 2.0 * std::numbers::pi / na, 0};
            break;
        }
        case StateKind::Qubit: {
            int nd = std::max(config.qubit_directions, 1);
            int ns = std::max(config.qubit_shells, 2);
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            grid.push_back({{0, 0, 0}, 0.0});
            for (int s = 1; s < ns; s++) {
                for (int k = 0; k < nd; k++) {
                    double z = 1.0 - 2.0 * (k + 0.5) / nd;
                    grid.push_back(
                        {{static_cast<double>(s) / (ns - 1), std::acos(z), std::fmod(golden * k, 2.0 * std::numbers::pi)},
                         0.0});
                }
            }
            steps = {1.0 / (ns - 1), std::sqrt(4.0 * std::numbers::pi / nd), std::sqrt(4.0 * std::numbers::pi / nd)};
            break;
        }
    }
    parallel_for(grid.size(), [&](std::size_t i) { grid[i].value = evaluator(from_polar(kind, grid[i].params)); });

    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); i++) {
        order[i] = i;
    }
    std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(std::max(config.refine_top, 1)), grid.size());
    std::partial_sort(order.begin(), order.begin() + top, order.end(), [&](std::size_t a, std::size_t b) {
        if (grid[a].value != grid[b].value) {
            return grid[a].value > grid[b].value;
        }
        return a < b;
    });
    MaxRiskResult best{grid[order[0]].value, from_polar(kind, grid[order[0]].params)};
    if (std::isinf(best.value)) {
        return best;
    }

    const int nparams = kind == StateKind::Coin ? 1 : (kind == StateKind::Rebit ? 2 : 3);
    std::vector<GridPoint> refined(top);
    parallel_for(
        top,
        [&](std::size_t j) {
            GridPoint p = grid[order[j]];
            Vec3 step = steps;
            int evals = 0;
            while (evals < 4000) {
                bool improved = false;
                for (int c = 0; c < nparams; c++) {
                    for (double sign : {1.0, -1.0}) {
                        Vec3 trial = p.params;
                        trial[c] += sign * step[c];
                        if (c == 0 && kind != StateKind::Coin) {
                            trial[0] = std::clamp(trial[0], 0.0, 1.0);
                        }
                        if (kind == StateKind::Coin) {
                            trial[0] = std::clamp(trial[0], -1.0, 1.0);
                        }
                        double v = evaluator(from_polar(kind, trial));
                        evals++;
                        if (v > p.value) {
                            p.params = trial;
                            p.value = v;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) {
                    double largest = 0.0;
                    for (int c = 0; c < nparams; c++) {
                        step[c] *= 0.5;
                        largest = std::max(largest, step[c]);
                    }
                    if (largest < config.refine_min_step) {
                        break;
                    }
                }
            }
            refined[j] = p;
        },
        1);
    for (const GridPoint &p : refined) {
        if (p.value > best.value) {
            best.value = p.value;
            best.argmax = from_polar(kind, p.params);
        }
    }
    return best;
}

std::vector<std::pair<double, double>> risk_profile(
    const TabulatedEstimator &estimator, const Vec3 &axis, int num_points) {
    if (num_points < 2) {
        throw Error(ErrorCode::InvalidArgument, "profile needs at least two points");
    }
    if (std::fabs(norm(axis) - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "profile axis must be a unit vector");
    }
    RiskEvaluator eval(estimator);
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(num_points));
    parallel_for(out.size(), [&](std::size_t i) {
        double t = static_cast<double>(i) / (num_points - 1);
        out[i] = {t, eval(BlochState(estimator.design().kind(), t * axis))};
    });
    return out;
}

RiskReport make_risk_report(
    const TabulatedEstimator &estimator,
    const MaxRiskConfig &config,
    const DiscretePrior *prior,
    const Vec3 *profile_axis,
    int profile_points) {
    RiskReport report{0.0, {}, std::nullopt, {}, estimator.design(), estimator.provenance()};
    MaxRiskResult mr = max_risk(estimator, config);
    report.pointwise_max = mr.value;
    report.argmax_state = mr.argmax;
    if (prior != nullptr) {
        report.bayes_risk = bayes_risk(*prior, estimator);
    }
    if (profile_axis != nullptr) {
        report.profile = risk_profile(estimator, *profile_axis, profile_points);
        for (const auto &[t, v] : report.profile) {
            if (v > report.pointwise_max) {
                report.pointwise_max = v;
                report.argmax_state = t * *profile_axis;
            }
        }
    }
    return report;
}

}  // namespace tomomax
