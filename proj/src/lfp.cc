#include "tomomax/lfp.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "tomomax/compensated_sum.h"
#include "tomomax/optimize.h"
#include "tomomax/parallel.h"

namespace tomomax {

namespace {

double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

// m log m - a log a - b log b with a, b = (m +- |v|)/2.
double mixture_term(double m, double vnorm) {
    double a = 0.5 * (m + vnorm);
    double b = std::max(0.0, 0.5 * (m - vnorm));
    return xlogx(m) - xlogx(a) - xlogx(b);
}

std::vector<double> normalized_weights(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) {
        total += x;
    }
    for (double &x : w) {
        x /= total;
    }
    return w;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

BayesRiskObjective::BayesRiskObjective(const ExperimentDesign &design, std::vector<Vec3> supports)
    : design_(design), supports_(std::move(supports)), dim_(dimension(design.kind())), shots_(design.shots()) {
    if (supports_.empty()) {
        throw Error(ErrorCode::InvalidArgument, "at least one support is required");
    }
    if (design.dataset_count() > kDefaultDatasetCap) {
        throw Error(ErrorCode::CapExceeded, "design has " + std::to_string(design.dataset_count()) + " datasets");
    }
    for (std::size_t b = 0; b + 1 < shots_.size(); b++) {
        rows_ *= static_cast<std::size_t>(shots_[b] + 1);
    }
    const std::size_t k = supports_.size();
    pmf_.resize(shots_.size());
    for (std::size_t b = 0; b < shots_.size(); b++) {
        pmf_[b].assign(static_cast<std::size_t>(shots_[b] + 1) * k, 0.0);
    }
    entropies_.resize(k);
    for (std::size_t i = 0; i < k; i++) {
        fill_column(i);
    }
}

void BayesRiskObjective::fill_column(std::size_t i) {
    const Vec3 r = project_to_ball(design_.kind(), supports_[i]);
    check_physical(design_.kind(), supports_[i]);
    supports_[i] = r;
    entropies_[i] = spectrum_entropy(std::min(1.0, norm(r)));
    const std::size_t k = supports_.size();
    DatasetLayout layout(design_);
    std::vector<double> buf(layout.pmf_size());
    layout.fill_pmfs(r, buf.data());
    for (std::size_t b = 0; b < shots_.size(); b++) {
        for (int n = 0; n <= shots_[b]; n++) {
            pmf_[b][static_cast<std::size_t>(n) * k + i] = buf[layout.pmf_offset(b) + static_cast<std::size_t>(n)];
        }
    }
}

void BayesRiskObjective::set_support(std::size_t i, const Vec3 &r) {
    supports_[i] = r;
    fill_column(i);
}

double BayesRiskObjective::value(const std::vector<double> &weights) const {
    return evaluate(weights, nullptr);
}

double BayesRiskObjective::value_and_gradient(const std::vector<double> &weights, std::vector<double> &gradient) const {
    return evaluate(weights, &gradient);
}

double BayesRiskObjective::evaluate(const std::vector<double> &weights, std::vector<double> *gradient) const {
    const std::size_t k = supports_.size();
    if (weights.size() != k) {
        throw Error(ErrorCode::ShapeMismatch, "weights and supports differ in length");
    }
    const std::size_t nb = shots_.size();
    const std::size_t last = nb - 1;
    const int m_last = shots_[last];
    const int d = dim_;
    const std::size_t rows_per_block = std::max<std::size_t>(1, 2048 / static_cast<std::size_t>(m_last + 1));
    const std::size_t num_blocks = (rows_ + rows_per_block - 1) / rows_per_block;
    std::vector<CompensatedSum> f_parts(num_blocks);
    std::vector<std::vector<double>> g_parts(gradient != nullptr ? num_blocks : 0);

    parallel_blocks(rows_, rows_per_block, [&](std::size_t block, std::size_t begin, std::size_t end) {
        std::vector<double> pre(k);
        std::vector<double> p(k);
        std::vector<double> g;
        if (gradient != nullptr) {
            g.assign(k, 0.0);
        }
        std::vector<int> counts(last, 0);
        std::size_t rem = begin;
        for (std::size_t b = last; b-- > 0;) {
            counts[b] = static_cast<int>(rem % static_cast<std::size_t>(shots_[b] + 1));
            rem /= static_cast<std::size_t>(shots_[b] + 1);
        }
        CompensatedSum f;
        for (std::size_t row = begin; row < end; row++) {
            std::fill(pre.begin(), pre.end(), 1.0);
            for (std::size_t b = 0; b < last; b++) {
                const double *col = pmf_[b].data() + static_cast<std::size_t>(counts[b]) * k;
                for (std::size_t i = 0; i < k; i++) {
                    pre[i] *= col[i];
                }
            }
            for (int n = 0; n <= m_last; n++) {
                const double *col = pmf_[last].data() + static_cast<std::size_t>(n) * k;
                double m = 0.0;
                Vec3 v{};
                for (std::size_t i = 0; i < k; i++) {
                    p[i] = pre[i] * col[i];
                    double wp = weights[i] * p[i];
                    m += wp;
                    for (int c = 0; c < d; c++) {
                        v[c] += wp * supports_[i][c];
                    }
                }
                if (m <= 0.0) {
                    continue;
                }
                double vn = norm(v);
                f += mixture_term(m, vn);
                if (gradient == nullptr) {
                    continue;
                }
                double a = 0.5 * (m + vn);
                double bm = 0.5 * (m - vn);
                if (bm <= 1e-8 * m && vn > 0.0) {
                    // m - |v| cancels; sum the nonnegative terms instead.
                    const Vec3 u = (1.0 / vn) * v;
                    bm = 0.0;
                    for (std::size_t i = 0; i < k; i++) {
                        bm += weights[i] * p[i] * std::max(0.0, 0.5 * (1.0 - dot(supports_[i], u)));
                    }
                }
                if (bm > 0.0) {
                    double lp = std::log(a / m);
                    double lm = std::log(bm / m);
                    double offset = -0.5 * (lp + lm);
                    double scale = vn > 0.0 ? -0.5 * (lp - lm) / vn : 0.0;
                    for (std::size_t i = 0; i < k; i++) {
                        if (p[i] != 0.0) {
                            g[i] += p[i] * (offset + scale * dot(supports_[i], v));
                        }
                    }
                } else {
                    Vec3 axis = (1.0 / vn) * v;
                    for (std::size_t i = 0; i < k; i++) {
                        if (p[i] != 0.0 && 0.5 * (1.0 - dot(supports_[i], axis)) > 1e-14) {
                            g[i] = kInf;
                        }
                    }
                }
            }
            for (std::size_t b = last; b-- > 0;) {
                if (++counts[b] <= shots_[b]) {
                    break;
                }
                counts[b] = 0;
            }
        }
        f_parts[block] = f;
        if (gradient != nullptr) {
            g_parts[block] = std::move(g);
        }
    });

    CompensatedSum total;
    for (const CompensatedSum &part : f_parts) {
        total += part;
    }
    for (std::size_t i = 0; i < k; i++) {
        total += -weights[i] * entropies_[i];
    }
    if (gradient != nullptr) {
        gradient->assign(k, 0.0);
        for (const auto &part : g_parts) {
            for (std::size_t i = 0; i < k; i++) {
                (*gradient)[i] += part[i];
            }
        }
        for (std::size_t i = 0; i < k; i++) {
            (*gradient)[i] -= entropies_[i];
        }
    }
    return total.value();
}

BayesRiskObjective::Mixture BayesRiskObjective::mixture(const std::vector<double> &weights) const {
    const std::size_t k = supports_.size();
    DatasetLayout layout(design_);
    Mixture out;
    out.mass.assign(layout.num_datasets(), 0.0);
    out.moment.assign(layout.num_datasets() * static_cast<std::size_t>(dim_), 0.0);
    std::vector<double> buf(layout.pmf_size());
    for (std::size_t i = 0; i < k; i++) {
        double w = weights[i];
        if (w == 0.0) {
            continue;
        }
        for (std::size_t b = 0; b < shots_.size(); b++) {
            for (int n = 0; n <= shots_[b]; n++) {
                buf[layout.pmf_offset(b) + static_cast<std::size_t>(n)] = pmf_[b][static_cast<std::size_t>(n) * k + i];
            }
        }
        const Vec3 &r = supports_[i];
        layout.for_each_weight(buf.data(), [&](std::size_t idx, double p) {
            double wp = w * p;
            out.mass[idx] += wp;
            for (int c = 0; c < dim_; c++) {
                out.moment[idx * dim_ + c] += wp * r[c];
            }
        });
        out.entropy_term += w * entropies_[i];
    }
    return out;
}

double BayesRiskObjective::value_with_move(
    const Mixture &base, const std::vector<double> &weights, std::size_t i, const Vec3 &r) const {
    const std::size_t k = supports_.size();
    DatasetLayout layout(design_);
    const double w = weights[i];
    std::vector<double> old_buf(layout.pmf_size());
    for (std::size_t b = 0; b < shots_.size(); b++) {
        for (int n = 0; n <= shots_[b]; n++) {
            old_buf[layout.pmf_offset(b) + static_cast<std::size_t>(n)] = pmf_[b][static_cast<std::size_t>(n) * k + i];
        }
    }
    std::vector<double> old_p(layout.num_datasets());
    layout.for_each_weight(old_buf.data(), [&](std::size_t idx, double p) { old_p[idx] = p; });
    std::vector<double> new_buf(layout.pmf_size());
    const Vec3 rn = project_to_ball(design_.kind(), r);
    layout.fill_pmfs(rn, new_buf.data());
    const Vec3 &ro = supports_[i];
    CompensatedSum f;
    layout.for_each_weight(new_buf.data(), [&](std::size_t idx, double p) {
        double m = base.mass[idx] + w * (p - old_p[idx]);
        Vec3 v{};
        for (int c = 0; c < dim_; c++) {
            v[c] = base.moment[idx * dim_ + c] + w * (p * rn[c] - old_p[idx] * ro[c]);
        }
        if (m > 0.0) {
            f += mixture_term(m, std::min(m, norm(v)));
        }
    });
    double entropy_term = base.entropy_term + w * (spectrum_entropy(std::min(1.0, norm(rn))) - entropies_[i]);
    f += -entropy_term;
    return f.value();
}

std::vector<double> BayesRiskObjective::negative_hessian(
    const std::vector<double> &weights, const std::vector<std::size_t> &indices) const {
    const std::size_t k = supports_.size();
    if (weights.size() != k) {
        throw Error(ErrorCode::ShapeMismatch, "weights and supports differ in length");
    }
    const std::size_t n = indices.size();
    for (std::size_t j : indices) {
        if (j >= k) {
            throw Error(ErrorCode::InvalidArgument, "support index out of range");
        }
    }
    const std::size_t nb = shots_.size();
    const std::size_t last = nb - 1;
    const int m_last = shots_[last];
    const int d = dim_;

    // -Hess h(m, v) = L L^T per dataset; the rows of L^T Z, with Z the columns
    // Pr(D|j) (1, r_j), are gathered in chunks and folded in by rank updates.
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::Index chunk = 512;
    Eigen::MatrixXd rows(chunk, static_cast<Eigen::Index>(n));
    Eigen::Index filled = 0;
    auto flush = [&]() {
        if (filled > 0) {
            acc.selfadjointView<Eigen::Lower>().rankUpdate(rows.topRows(filled).transpose());
            filled = 0;
        }
    };

    std::vector<double> pre(k);
    std::vector<double> p(k);
    std::vector<int> counts(last, 0);
    Eigen::Matrix4d q;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig;
    for (std::size_t row = 0; row < rows_; row++) {
        std::fill(pre.begin(), pre.end(), 1.0);
        for (std::size_t b = 0; b < last; b++) {
            const double *col = pmf_[b].data() + static_cast<std::size_t>(counts[b]) * k;
            for (std::size_t i = 0; i < k; i++) {
                pre[i] *= col[i];
            }
        }
        for (int nl = 0; nl <= m_last; nl++) {
            const double *col = pmf_[last].data() + static_cast<std::size_t>(nl) * k;
            double m = 0.0;
            Vec3 v{};
            for (std::size_t i = 0; i < k; i++) {
                p[i] = pre[i] * col[i];
                double wp = weights[i] * p[i];
                m += wp;
                for (int c = 0; c < d; c++) {
                    v[c] += wp * supports_[i][c];
                }
            }
            if (m <= 0.0) {
                continue;
            }
            const double u = norm(v);
            const double a = 0.5 * (m + u);
            const double b = std::max(0.5 * (m - u), 1e-14 * m);
            // phi / u with phi = log(b/a)/2; the limit u -> 0 is -1/m.
            const double phi_u = u > 1e-8 * m ? 0.5 * std::log(b / a) / u : -1.0 / m;
            const Vec3 dir = u > 1e-8 * m ? (1.0 / u) * v : Vec3{};
            const double s = 0.25 * (1.0 / a + 1.0 / b);
            const double t = 0.25 * (1.0 / a - 1.0 / b);
            q.setZero();
            q(0, 0) = s - 1.0 / m;
            for (int c = 0; c < d; c++) {
                q(0, 1 + c) = q(1 + c, 0) = t * dir[c];
                for (int e = 0; e < d; e++) {
                    q(1 + c, 1 + e) = (s + phi_u) * dir[c] * dir[e] - (c == e ? phi_u : 0.0);
                }
            }
            eig.compute(q);
            const double lmax = eig.eigenvalues()(3);
            for (int ev = 0; ev < 4; ev++) {
                const double lambda = eig.eigenvalues()(ev);
                if (!(lambda > 1e-13 * lmax)) {
                    continue;
                }
                const double sq = std::sqrt(lambda);
                const auto vec = eig.eigenvectors().col(ev);
                for (std::size_t j = 0; j < n; j++) {
                    const std::size_t i = indices[j];
                    double proj = vec(0);
                    for (int c = 0; c < d; c++) {
                        proj += vec(1 + c) * supports_[i][c];
                    }
                    rows(filled, static_cast<Eigen::Index>(j)) = sq * p[i] * proj;
                }
                if (++filled == chunk) {
                    flush();
                }
            }
        }
        for (std::size_t b = last; b-- > 0;) {
            if (++counts[b] <= shots_[b]) {
                break;
            }
            counts[b] = 0;
        }
    }
    flush();
    std::vector<double> out(n * n);
    for (std::size_t r = 0; r < n; r++) {
        for (std::size_t c = 0; c <= r; c++) {
            double x = acc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            out[r * n + c] = x;
            out[c * n + r] = x;
        }
    }
    return out;
}

namespace {

// Minimizes (1/2) d^T K d - g.d over d with z + d on the simplex by
// accelerated projected gradient.
Eigen::VectorXd simplex_qp(const Eigen::MatrixXd &kk, const Eigen::VectorXd &g, const Eigen::VectorXd &z) {
    const Eigen::Index n = z.size();
    // Largest eigenvalue by power iteration, padded for safety.
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lmax = 0.0;
    for (int it = 0; it < 50; it++) {
        Eigen::VectorXd kv = kk * v;
        double nv = kv.norm();
        if (!(nv > 0.0)) {
            break;
        }
        lmax = nv;
        v = kv / nv;
    }
    const double step = 1.0 / (1.1 * std::max(lmax, 1e-300));
    auto project = [&](const Eigen::VectorXd &x) {
        std::vector<double> buf(x.data(), x.data() + n);
        buf = project_to_simplex(buf);
        return Eigen::Map<Eigen::VectorXd>(buf.data(), n).eval();
    };
    Eigen::VectorXd x = z;
    Eigen::VectorXd yk = z;
    double tk = 1.0;
    double prev_obj = 0.0;
    for (int it = 0; it < 5000; it++) {
        Eigen::VectorXd grad = kk * (yk - z) - g;
        Eigen::VectorXd xn = project(yk - step * grad);
        const Eigen::VectorXd dx = xn - z;
        const double obj = 0.5 * dx.dot(kk * dx) - g.dot(dx);
        // Restart the momentum whenever the objective goes up.
        if (it > 0 && obj > prev_obj) {
            tk = 1.0;
            yk = x;
            continue;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        yk = xn + ((tk - 1.0) / tn) * (xn - x);
        const double moved = (xn - x).lpNorm<Eigen::Infinity>();
        x = std::move(xn);
        tk = tn;
        if (it > 0 && moved <= 1e-13) {
            break;
        }
        prev_obj = obj;
    }
    return x - z;
}

// Sequential quadratic ascent from res on the supports with weight plus those
// whose gradient exceeds f. Each step maximizes a damped second-order model
// over the simplex and line-searches along it. Returns false when it cannot make
// progress, leaving res at its best point.
bool newton_polish(const BayesRiskObjective &objective, WeightSolverResult &res, const WeightSolverConfig &config) {
    const std::size_t k = objective.size();
    auto all_finite = [](const std::vector<double> &g) {
        return std::all_of(g.begin(), g.end(), [](double x) { return std::isfinite(x); });
    };
    if (!all_finite(res.gradient)) {
        return false;
    }
    auto gap_of = [](const std::vector<double> &g, double f) { return *std::max_element(g.begin(), g.end()) - f; };

    double mu_scale = 1e-6;
    std::vector<double> trial_grad;
    for (int step = 0; step < 200 && res.iterations < config.max_iterations; step++) {
        const double f = res.bayes_risk;
        if (res.gap <= config.rel_tol * f) {
            return true;
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < k; i++) {
            if (res.weights[i] > 0.0 || res.gradient[i] > f) {
                idx.push_back(i);
            }
        }
        if (idx.size() > config.newton_max_active) {
            return false;
        }
        res.iterations++;
        const std::vector<double> hneg = objective.negative_hessian(res.weights, idx);
        const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd kk = Eigen::Map<const Eigen::MatrixXd>(hneg.data(), n, n);
        const double diag_scale = std::max(kk.diagonal().mean(), 1e-300);
        Eigen::VectorXd gv(n);
        Eigen::VectorXd z(n);
        for (Eigen::Index j = 0; j < n; j++) {
            gv(j) = res.gradient[idx[static_cast<std::size_t>(j)]];
            z(j) = res.weights[idx[static_cast<std::size_t>(j)]];
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 8 && !accepted; attempt++) {
            Eigen::MatrixXd damped = kk;
            damped.diagonal().array() += mu_scale * diag_scale;
            const Eigen::VectorXd dir = simplex_qp(damped, gv, z);
            const double predicted = gv.dot(dir) - 0.5 * dir.dot(kk * dir);
            if (!dir.allFinite() || !(predicted > 0.0)) {
                mu_scale *= 10.0;
                continue;
            }
            for (int half = 0; half < 20; half++) {
                const double t = std::ldexp(1.0, -half);
                std::vector<double> w = res.weights;
                for (Eigen::Index j = 0; j < n; j++) {
                    std::size_t i = idx[static_cast<std::size_t>(j)];
                    w[i] = std::max(0.0, z(j) + t * dir(j));
                    if (w[i] < 1e-14) {
                        w[i] = 0.0;
                    }
                }
                w = normalized_weights(std::move(w));
                const double ft = objective.value_and_gradient(w, trial_grad);
                if (ft > f && all_finite(trial_grad)) {
                    const double ratio = (ft - f) / (t * predicted);
                    if (half == 0 && ratio > 0.5) {
                        mu_scale = std::max(mu_scale * 0.2, 1e-12);
                    } else if (half > 0 || ratio < 0.1) {
                        mu_scale *= 4.0;
                    }
                    res.weights = std::move(w);
                    res.gradient.swap(trial_grad);
                    res.bayes_risk = ft;
                    res.gap = gap_of(res.gradient, ft);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                mu_scale *= 10.0;
            }
        }
        if (!accepted) {
            return false;
        }
    }
    return res.gap <= config.rel_tol * res.bayes_risk;
}

}  // namespace

WeightSolverResult solve_weights(
    const BayesRiskObjective &objective, std::vector<double> init_weights, const WeightSolverConfig &config) {
    const std::size_t k = objective.size();
    if (init_weights.empty()) {
        init_weights.assign(k, 1.0 / static_cast<double>(k));
    }
    if (init_weights.size() != k) {
        throw Error(ErrorCode::ShapeMismatch, "initial weights and supports differ in length");
    }
    // Multiplicative updates cannot revive a zero weight.
    double total = 0.0;
    for (double &w : init_weights) {
        if (!(w >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
        }
        w = std::max(w, 1e-12);
        total += w;
    }
    for (double &w : init_weights) {
        w /= total;
    }

    WeightSolverResult res;
    res.weights = std::move(init_weights);
    res.bayes_risk = objective.value_and_gradient(res.weights, res.gradient);
    auto gap_of = [](const std::vector<double> &g, double f) { return *std::max_element(g.begin(), g.end()) - f; };
    res.gap = gap_of(res.gradient, res.bayes_risk);
    if (k == 1) {
        res.converged = true;
        return res;
    }
    const double f_scale = std::max(res.bayes_risk, 1e-300);
    double eta = 1.0 / f_scale;
    const double eta_floor = 1e-10 / f_scale;
    std::vector<double> trial(k);
    std::vector<double> trial_grad;
    std::vector<double> g_eff(k);

    double newton_at = config.newton_switch;
    while (res.iterations < config.max_iterations) {
        const double f = res.bayes_risk;
        if (res.gap <= config.rel_tol * f) {
            res.converged = true;
            break;
        }
        if (newton_at > 0.0 && res.gap <= newton_at * f) {
            WeightSolverResult polished = res;
            if (newton_polish(objective, polished, config)) {
                res = std::move(polished);
                res.converged = true;
                return res;
            }
            res.iterations = polished.iterations;
            if (polished.gap <= 1e-7 * polished.bayes_risk) {
                // Stalled at the resolution of the objective; multiplicative
                // steps would not get further.
                res = std::move(polished);
                break;
            }
            newton_at = 0.1 * res.gap / f;
            if (polished.bayes_risk > f) {
                // Zeroed weights cannot grow again under multiplicative steps.
                for (double &w : polished.weights) {
                    w = std::max(w, 1e-12);
                }
                res.weights = normalized_weights(std::move(polished.weights));
                res.bayes_risk = objective.value_and_gradient(res.weights, res.gradient);
                res.gap = gap_of(res.gradient, res.bayes_risk);
                continue;
            }
        }
        double finite_max = -kInf;
        for (double g : res.gradient) {
            if (std::isfinite(g)) {
                finite_max = std::max(finite_max, g);
            }
        }
        for (std::size_t i = 0; i < k; i++) {
            g_eff[i] = std::isfinite(res.gradient[i]) ? res.gradient[i] : finite_max + 10.0 * f_scale;
        }
        double top = *std::max_element(g_eff.begin(), g_eff.end());

        res.iterations++;
        double sum = 0.0;
        for (std::size_t i = 0; i < k; i++) {
            trial[i] = res.weights[i] * std::exp(eta * (g_eff[i] - top));
            sum += trial[i];
        }
        for (double &w : trial) {
            w /= sum;
        }
        double ft = objective.value_and_gradient(trial, trial_grad);
        if (ft >= f) {
            res.weights.swap(trial);
            res.gradient.swap(trial_grad);
            res.bayes_risk = ft;
            res.gap = gap_of(res.gradient, ft);
            eta = std::min(eta * 1.5, 1e12 / f_scale);
            continue;
        }
        eta *= 0.3;
        if (eta >= eta_floor) {
            continue;
        }

        // Multiplicative step stalled: try projected gradient steps.
        bool moved = false;
        double spread = top - *std::min_element(g_eff.begin(), g_eff.end());
        double t = spread > 0.0 ? 1.0 / spread : 1.0;
        std::vector<double> direction(k);
        for (std::size_t i = 0; i < k; i++) {
            direction[i] = g_eff[i] - f;
        }
        for (int attempt = 0; attempt < 60 && res.iterations < config.max_iterations; attempt++, t *= 0.5) {
            res.iterations++;
            std::vector<double> moved_w(k);
            for (std::size_t i = 0; i < k; i++) {
                moved_w[i] = res.weights[i] + t * direction[i];
            }
            moved_w = project_to_simplex(moved_w);
            double fp = objective.value_and_gradient(moved_w, trial_grad);
            if (fp > f) {
                res.weights = std::move(moved_w);
                res.gradient.swap(trial_grad);
                res.bayes_risk = fp;
                res.gap = gap_of(res.gradient, fp);
                moved = true;
                break;
            }
        }
        if (!moved) {
            break;
        }
        eta = 1.0 / f_scale;
    }
    if (res.gap <= config.rel_tol * res.bayes_risk) {
        res.converged = true;
    }
    return res;
}

namespace {

std::vector<Vec3> vectors_of(const std::vector<BlochState> &states) {
    std::vector<Vec3> out;
    out.reserve(states.size());
    for (const BlochState &s : states) {
        out.push_back(s.r());
    }
    return out;
}

std::vector<BlochState> states_of(StateKind kind, const std::vector<Vec3> &vectors) {
    std::vector<BlochState> out;
    out.reserve(vectors.size());
    for (const Vec3 &v : vectors) {
        out.emplace_back(kind, v);
    }
    return out;
}

}  // namespace

DiscretePrior maximize_weights(
    const std::vector<BlochState> &supports,
    const ExperimentDesign &design,
    std::vector<double> init_weights,
    const WeightSolverConfig &config) {
    if (supports.empty()) {
        throw Error(ErrorCode::InvalidArgument, "at least one support is required");
    }
    for (const BlochState &s : supports) {
        if (s.kind() != design.kind()) {
            throw Error(ErrorCode::KindMismatch, "support kind differs from the design");
        }
    }
    BayesRiskObjective objective(design, vectors_of(supports));
    WeightSolverResult res = solve_weights(objective, std::move(init_weights), config);
    if (!res.converged) {
        throw Error(
            ErrorCode::NonConvergence,
            "weight solver stopped with optimality gap " + std::to_string(res.gap) + " after " +
                std::to_string(res.iterations) + " iterations");
    }
    return DiscretePrior(supports, normalized_weights(res.weights));
}

LfpResult certify_prior(const DiscretePrior &prior, const ExperimentDesign &design, const MaxRiskConfig &config) {
    if (prior.kind() != design.kind()) {
        throw Error(ErrorCode::KindMismatch, "prior kind differs from the design");
    }
    TabulatedEstimator table = tabulate_bayes(prior, design, "least favorable prior posterior mean");
    RiskEvaluator eval(table);
    CompensatedSum av;
    double upper = -kInf;
    Vec3 argmax{};
    for (std::size_t i = 0; i < prior.size(); i++) {
        double risk = eval(prior.support(i));
        if (prior.weight(i) > 0.0) {
            av += prior.weight(i) * risk;
        }
        if (risk > upper) {
            upper = risk;
            argmax = prior.support(i).r();
        }
    }
    MaxRiskResult mr = max_risk(eval, config);
    if (mr.value > upper) {
        upper = mr.value;
        argmax = mr.argmax;
    }
    double lower = av.value();
    double gap = lower > 0.0 ? (upper - lower) / lower : (upper > 0.0 ? kInf : 0.0);
    return LfpResult{
        prior, std::move(table), lower, upper, gap, argmax, 0, 0.0, "certificate", LfpStatus::Converged, {}, {}, 0, {}};
}

std::pair<double, double> minimax_certificate(const LfpResult &result) {
    return {result.av_risk, result.max_risk};
}

DiscretePrior default_initial_prior(StateKind kind) {
    std::vector<BlochState> supports;
    switch (kind) {
        case StateKind::Coin:
            supports = {BlochState::coin(0.0), BlochState::coin(0.5), BlochState::coin(1.0)};
            break;
        case StateKind::Rebit:
            supports.push_back(BlochState::maximally_mixed(kind));
            for (int k = 0; k < 8; k++) {
                double a = std::numbers::pi * k / 4.0;
                supports.emplace_back(kind, Vec3{std::cos(a), std::sin(a), 0});
            }
            break;
        case StateKind::Qubit:
            supports.push_back(BlochState::maximally_mixed(kind));
            for (int c = 0; c < 3; c++) {
                for (double s : {1.0, -1.0}) {
                    Vec3 v{};
                    v[c] = s;
                    supports.emplace_back(kind, v);
                }
            }
            break;
    }
    return DiscretePrior::uniform(std::move(supports));
}

DiscretePrior default_initial_prior(const ExperimentDesign &design) {
    if (design.kind() != StateKind::Coin) {
        return default_initial_prior(design.kind());
    }
    const int k = std::max(3, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(design.total_shots()))))) | 1;
    std::vector<BlochState> supports;
    for (int i = 0; i < k; i++) {
        supports.emplace_back(StateKind::Coin, Vec3{-1.0 + 2.0 * i / (k - 1), 0, 0});
    }
    return DiscretePrior::uniform(std::move(supports));
}

namespace {

WeightSolverConfig inner_config(WeightSolverConfig config, double tol) {
    if (config.rel_tol <= 0.0) {
        config.rel_tol = tol / 50.0;
    }
    return config;
}

int polar_params(StateKind kind) {
    return kind == StateKind::Coin ? 1 : (kind == StateKind::Rebit ? 2 : 3);
}

// Coordinate pattern search over one support's polar coordinates with the
// other supports and all weights fixed. Returns true when the support moved.
bool improve_location(
    BayesRiskObjective &objective,
    const std::vector<double> &weights,
    std::size_t j,
    double initial_step,
    double &f) {
    const StateKind kind = objective.design().kind();
    const BayesRiskObjective::Mixture mix = objective.mixture(weights);
    Vec3 p = to_polar(kind, objective.supports()[j]);
    const int np = polar_params(kind);
    double angular = initial_step / std::max(p[0], 0.1);
    Vec3 step{initial_step, angular, angular};
    double best = f;
    bool moved = false;
    int evals = 0;
    while (evals < 600) {
        bool improved = false;
        for (int c = 0; c < np; c++) {
            for (double sign : {1.0, -1.0}) {
                Vec3 trial = p;
                trial[c] += sign * step[c];
                if (c == 0) {
                    trial[0] = kind == StateKind::Coin ? std::clamp(trial[0], -1.0, 1.0) : std::clamp(trial[0], 0.0, 1.0);
                }
                double v = objective.value_with_move(mix, weights, j, from_polar(kind, trial));
                evals++;
                if (v > best) {
                    best = v;
                    p = trial;
                    improved = true;
                    moved = true;
                    break;
                }
            }
        }
        if (!improved) {
            double largest = 0.0;
            for (int c = 0; c < np; c++) {
                step[c] *= 0.5;
                largest = std::max(largest, step[c]);
            }
            if (largest < 1e-7) {
                break;
            }
        }
    }
    if (moved) {
        objective.set_support(j, from_polar(kind, p));
        f = objective.value(weights);
    }
    return moved;
}

// Merges near-duplicates and drops supports at or below min_weight (none when
// min_weight < 0).
void consolidate(
    StateKind kind, std::vector<Vec3> &supports, std::vector<double> &weights, double distance, double min_weight) {
    std::vector<BlochState> states;
    std::vector<double> kept;
    for (std::size_t i = 0; i < supports.size(); i++) {
        if (weights[i] > min_weight) {
            states.emplace_back(kind, supports[i]);
            kept.push_back(weights[i]);
        }
    }
    DiscretePrior merged = DiscretePrior::normalized(std::move(states), std::move(kept), distance);
    supports = vectors_of(merged.supports());
    weights = merged.weights();
}

}  // namespace

LfpResult kempthorne_lfp(
    const ExperimentDesign &design, const std::optional<DiscretePrior> &init_prior, const KempthorneConfig &config) {
    if (!(config.tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tol must be positive");
    }
    if (config.mixing_alpha >= 1.0) {
        throw Error(ErrorCode::InvalidArgument, "mixing_alpha must lie in (0, 1)");
    }
    const auto start = std::chrono::steady_clock::now();
    const StateKind kind = design.kind();
    DiscretePrior prior = init_prior.value_or(default_initial_prior(design));
    if (prior.kind() != kind) {
        throw Error(ErrorCode::KindMismatch, "initial prior kind differs from the design");
    }
    std::vector<Vec3> supports = vectors_of(prior.supports());
    std::vector<double> weights = prior.weights();
    const double step0 = 0.25 / std::sqrt(static_cast<double>(design.total_shots()));
    std::vector<LfpIteration> history;
    double previous_f = -kInf;
    const WeightSolverConfig inner = inner_config(config.weights, config.tol);

    for (int iteration = 1;; iteration++) {
        BayesRiskObjective objective(design, supports);
        double f = previous_f;
        for (int round = 0; round < std::max(config.location_rounds, 1); round++) {
            WeightSolverResult ws = solve_weights(objective, weights, inner);
            if (!std::isfinite(ws.bayes_risk)) {
                throw Error(ErrorCode::InnerSolverFailure, "weight solver produced a non-finite Bayes risk");
            }
            weights = ws.weights;
            double before = ws.bayes_risk;
            f = before;
            for (std::size_t j = 0; j < objective.size(); j++) {
                if (weights[j] > 1e-9) {
                    improve_location(objective, weights, j, step0, f);
                }
            }
            if (f - before <= 1e-10 * std::max(before, 1e-300)) {
                break;
            }
        }
        WeightSolverResult ws = solve_weights(objective, weights, inner);
        weights = ws.weights;
        supports = objective.supports();
        consolidate(kind, supports, weights, config.merge_distance, -1.0);
        previous_f = std::max(previous_f, ws.bayes_risk);

        LfpResult cert = certify_prior(DiscretePrior(states_of(kind, supports), weights), design, config.max_risk);
        history.push_back({iteration, cert.av_risk, cert.max_risk, supports.size()});
        cert.algorithm = "kempthorne";
        cert.iterations = iteration;
        cert.history = history;
        cert.wall_seconds = elapsed_seconds(start);
        cert.settings = {
            {"tol", config.tol},
            {"mixing_alpha", config.mixing_alpha},
            {"max_iterations", config.max_iterations},
            {"location_rounds", config.location_rounds},
            {"weight_rel_tol", inner_config(config.weights, config.tol).rel_tol},
            {"merge_distance", config.merge_distance}};
        bool done = cert.gap <= config.tol;
        if (!done && iteration >= config.max_iterations) {
            cert.status = LfpStatus::IterationLimit;
            done = true;
        }
        if (config.on_iteration) {
            config.on_iteration(cert);
        }
        if (done) {
            return cert;
        }

        // Add the risk maximizer (or boost the support it coincides with).
        const std::size_t k = supports.size();
        std::size_t target = k;
        for (std::size_t i = 0; i < k; i++) {
            if (distance(supports[i], cert.argmax) < config.merge_distance) {
                target = i;
            }
        }
        if (target == k) {
            supports.push_back(cert.argmax);
            weights.push_back(0.0);
        }
        BayesRiskObjective grown(design, supports);
        double base = grown.value(weights);
        double alpha = config.mixing_alpha > 0.0 ? config.mixing_alpha : 1.0 / static_cast<double>(k + 1);
        for (int attempt = 0; attempt < 50; attempt++, alpha *= 0.5) {
            std::vector<double> mixed = weights;
            for (std::size_t i = 0; i < k; i++) {
                if (i != target) {
                    mixed[i] = std::max(0.0, mixed[i] - alpha / static_cast<double>(k));
                }
            }
            mixed[target] += alpha;
            mixed = normalized_weights(mixed);
            if (grown.value(mixed) >= base) {
                weights = mixed;
                break;
            }
        }
    }
}

namespace {

std::string rng_state(const std::mt19937_64 &rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

// Survivors (weight >= weight_tol) followed by m_per_point Gaussian children of
// each of the heaviest max_parents, projected into the state space.
// next_weights receives a warm start for the weight solver: survivors keep
// their weight, children start at 1% of the parent's.
std::vector<Vec3> respawn(
    StateKind kind,
    const std::vector<Vec3> &supports,
    const std::vector<double> &weights,
    const MonteCarloConfig &config,
    double sigma,
    std::mt19937_64 &rng,
    std::vector<double> &next_weights) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec3> next;
    next_weights.clear();
    std::vector<std::size_t> parents;
    for (std::size_t i = 0; i < supports.size(); i++) {
        if (weights[i] >= config.weight_tol) {
            parents.push_back(next.size());
            next.push_back(supports[i]);
            next_weights.push_back(weights[i]);
        }
    }
    if (config.max_parents > 0 && parents.size() > config.max_parents) {
        std::stable_sort(parents.begin(), parents.end(), [&](std::size_t a, std::size_t b) {
            return next_weights[a] > next_weights[b];
        });
        parents.resize(config.max_parents);
        std::sort(parents.begin(), parents.end());
    }
    for (std::size_t i : parents) {
        for (int c = 0; c < config.m_per_point; c++) {
            Vec3 child = next[i];
            for (int k = 0; k < dimension(kind); k++) {
                child[k] += sigma * gauss(rng);
            }
            next.push_back(project_to_ball(kind, child));
            next_weights.push_back(0.01 * next_weights[i]);
        }
    }
    return next;
}

LfpResult run_mc(
    const ExperimentDesign &design,
    const MonteCarloConfig &config,
    std::vector<Vec3> supports,
    std::vector<double> init_weights,
    int first_iteration,
    std::mt19937_64 rng,
    std::vector<LfpIteration> history,
    double sigma) {
    const auto start = std::chrono::steady_clock::now();
    const StateKind kind = design.kind();
    std::optional<LfpResult> best;

    for (int iteration = first_iteration;; iteration++) {
        if (init_weights.empty()) {
            init_weights.assign(supports.size(), 1.0);
        }
        // Pruning already happened in respawn.
        consolidate(kind, supports, init_weights, config.merge_distance, -1.0);
        BayesRiskObjective objective(design, supports);
        WeightSolverResult ws = solve_weights(objective, init_weights, inner_config(config.weights, config.tol));
        if (!std::isfinite(ws.bayes_risk)) {
            throw Error(ErrorCode::InnerSolverFailure, "weight solver produced a non-finite Bayes risk");
        }
        std::vector<double> weights = normalized_weights(ws.weights);
        LfpResult cert = certify_prior(DiscretePrior(states_of(kind, supports), weights), design, config.max_risk);
        history.push_back({iteration, cert.av_risk, cert.max_risk, supports.size()});
        cert.algorithm = "monte-carlo";
        cert.iterations = iteration;
        cert.history = history;
        cert.seed = config.seed;
        cert.rng_state = rng_state(rng);
        cert.settings = {
            {"n_init", static_cast<double>(config.n_init)},
            {"tol", config.tol},
            {"weight_tol", config.weight_tol},
            {"m_per_point", config.m_per_point},
            {"max_parents", static_cast<double>(config.max_parents)},
            {"sigma", sigma},
            {"max_iterations", config.max_iterations},
            {"weight_rel_tol", inner_config(config.weights, config.tol).rel_tol},
            {"merge_distance", config.merge_distance}};
        cert.wall_seconds = elapsed_seconds(start);
        bool converged = cert.gap <= config.tol;
        if (!best || cert.gap < best->gap || converged) {
            best = cert;
        }
        if (config.on_iteration) {
            config.on_iteration(cert);
        }
        if (converged) {
            return cert;
        }
        if (iteration >= config.max_iterations) {
            best->status = LfpStatus::IterationLimit;
            best->history = history;
            best->wall_seconds = elapsed_seconds(start);
            return *best;
        }

        supports = respawn(kind, supports, weights, config, sigma, rng, init_weights);
    }
}

double default_sigma(const ExperimentDesign &design, double sigma) {
    return sigma > 0.0 ? sigma : 0.5 / std::sqrt(static_cast<double>(design.total_shots()));
}

void check_mc_config(const MonteCarloConfig &config) {
    if (config.n_init < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_init must be at least 1");
    }
    if (!(config.tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tol must be positive");
    }
    if (config.weight_tol < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "weight_tol must be nonnegative");
    }
    if (config.m_per_point < 0) {
        throw Error(ErrorCode::InvalidArgument, "m_per_point must be nonnegative");
    }
}

}  // namespace

LfpResult mc_lfp(const ExperimentDesign &design, const MonteCarloConfig &config) {
    check_mc_config(config);
    std::vector<Vec3> supports = vectors_of(sample_hs_uniform(design.kind(), config.n_init, config.seed));
    return run_mc(
        design, config, std::move(supports), {}, 1, std::mt19937_64(config.seed), {},
        default_sigma(design, config.sigma));
}

LfpResult mc_lfp_resume(const ExperimentDesign &design, const LfpResult &checkpoint, const MonteCarloConfig &config) {
    check_mc_config(config);
    if (checkpoint.algorithm != "monte-carlo" || checkpoint.rng_state.empty()) {
        throw Error(ErrorCode::InvalidArgument, "checkpoint does not come from a Monte Carlo run");
    }
    if (checkpoint.prior.kind() != design.kind()) {
        throw Error(ErrorCode::KindMismatch, "checkpoint kind differs from the design");
    }
    std::mt19937_64 rng;
    std::istringstream is(checkpoint.rng_state);
    is >> rng;
    if (!is) {
        throw Error(ErrorCode::InvalidArgument, "malformed generator state in checkpoint");
    }
    const double sigma = default_sigma(design, config.sigma);
    std::vector<double> weights;
    std::vector<Vec3> supports = respawn(
        design.kind(), vectors_of(checkpoint.prior.supports()), checkpoint.prior.weights(), config, sigma, rng,
        weights);
    return run_mc(
        design, config, std::move(supports), std::move(weights), checkpoint.iterations + 1, rng, checkpoint.history,
        sigma);
}

}  // namespace tomomax
