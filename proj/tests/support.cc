#include "support.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "tomomax/risk.h"

namespace tomomax::testing {

namespace {

using Mat2 = Eigen::Matrix2cd;

Mat2 density(const Vec3 &r) {
    const std::complex<double> i(0.0, 1.0);
    Mat2 rho;
    rho << 1.0 + r[2], r[0] - i * r[1], r[0] + i * r[1], 1.0 - r[2];
    return 0.5 * rho;
}

// Tr rho log sigma with 0 log 0 = 0 and -inf on a support violation.
double trace_log(const Mat2 &rho, const Mat2 &sigma) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(sigma);
    double total = 0.0;
    for (int j = 0; j < 2; j++) {
        const Eigen::Vector2cd v = es.eigenvectors().col(j);
        const double overlap = (v.adjoint() * rho * v)(0, 0).real();
        const double lambda = es.eigenvalues()(j);
        if (lambda <= 1e-15) {
            if (overlap > 1e-12) {
                return -kInf;
            }
            continue;
        }
        total += overlap * std::log(lambda);
    }
    return total;
}

std::string describe(const Vec3 &r) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "(" << r[0] << ", " << r[1] << ", " << r[2] << ")";
    return ss.str();
}

}  // namespace

double matrix_relative_entropy(const Vec3 &rho, const Vec3 &sigma) {
    const Mat2 a = density(rho);
    const Mat2 b = density(sigma);
    const double cross = trace_log(a, b);
    if (cross == -kInf) {
        return kInf;
    }
    return trace_log(a, a) - cross;
}

double scalar_kl(double p, double q) {
    auto term = [](double x, double y) {
        if (x == 0.0) {
            return 0.0;
        }
        if (y == 0.0) {
            return kInf;
        }
        return x * std::log(x / y);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

double binomial_likelihood(const std::vector<int> &shots, const std::vector<int> &counts, const std::vector<double> &q) {
    double log_total = 0.0;
    for (std::size_t b = 0; b < shots.size(); b++) {
        const int m = shots[b];
        const int n = counts[b];
        log_total += std::lgamma(m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0);
        if (n > 0) {
            if (q[b] == 0.0) {
                return 0.0;
            }
            log_total += n * std::log(q[b]);
        }
        if (n < m) {
            if (q[b] == 1.0) {
                return 0.0;
            }
            log_total += (m - n) * std::log1p(-q[b]);
        }
    }
    return std::exp(log_total);
}

Vec3 rebit_grid_argmax(int m, int nx, int ny, double beta, int points) {
    auto objective = [&](double x, double y) {
        const double r2 = x * x + y * y;
        double total = 0.0;
        for (auto [n, c] : {std::pair{nx, x}, std::pair{ny, y}}) {
            const double q = 0.5 * (1.0 + c);
            if (n > 0) {
                total += q > 0.0 ? n * std::log(q) : -kInf;
            }
            if (n < m) {
                total += q < 1.0 ? (m - n) * std::log(1.0 - q) : -kInf;
            }
        }
        if (beta > 0.0) {
            total += r2 < 1.0 ? beta * std::log(1.0 - r2) : -kInf;
        }
        return total;
    };
    const int side = static_cast<int>(std::sqrt(static_cast<double>(points)));
    double best = -kInf;
    double bx = 0.0;
    double by = 0.0;
    for (int i = 0; i <= side; i++) {
        const double t = static_cast<double>(i) / side;
        for (int j = 0; j < side; j++) {
            const double th = 2.0 * std::numbers::pi * j / side;
            const double x = t * std::cos(th);
            const double y = t * std::sin(th);
            const double v = objective(x, y);
            if (v > best) {
                best = v;
                bx = x;
                by = y;
            }
        }
    }
    // Zoom in with Cartesian grids; points outside the disk are pulled onto it.
    double half = 4.0 * 2.0 * std::numbers::pi / side;
    for (int round = 0; round < 12; round++) {
        const double cx = bx;
        const double cy = by;
        for (int i = -50; i <= 50; i++) {
            for (int j = -50; j <= 50; j++) {
                double x = cx + half * i / 50.0;
                double y = cy + half * j / 50.0;
                const double rr = std::hypot(x, y);
                if (rr > 1.0) {
                    x /= rr;
                    y /= rr;
                }
                const double v = objective(x, y);
                if (v > best) {
                    best = v;
                    bx = x;
                    by = y;
                }
            }
        }
        half *= 0.2;
    }
    return {bx, by, 0.0};
}

double binomial_expectation(int m, double q, const std::function<double(int)> &f) {
    double total = 0.0;
    for (int n = 0; n <= m; n++) {
        const double w = binomial_likelihood({m}, {n}, {q});
        if (w > 0.0) {
            total += w * f(n);
        }
    }
    return total;
}

Vec3 random_state(StateKind kind, std::mt19937_64 &rng, double max_radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int d = dimension(kind);
    while (true) {
        Vec3 r{};
        for (int c = 0; c < d; c++) {
            r[static_cast<std::size_t>(c)] = u(rng);
        }
        if (norm(r) <= 1.0) {
            return max_radius * r;
        }
    }
}

std::vector<double> random_rotation(StateKind kind, std::mt19937_64 &rng) {
    if (kind == StateKind::Rebit) {
        std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        const double a = u(rng);
        return {std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0};
    }
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    const Eigen::Matrix3d m = q.toRotationMatrix();
    std::vector<double> out(9);
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            out[static_cast<std::size_t>(3 * i + j)] = m(i, j);
        }
    }
    return out;
}

Vec3 rotate(StateKind kind, const Vec3 &r, const std::vector<double> &matrix) {
    Vec3 out{};
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            out[static_cast<std::size_t>(i)] += matrix[static_cast<std::size_t>(3 * i + j)] * r[static_cast<std::size_t>(j)];
        }
    }
    if (kind == StateKind::Rebit) {
        out[2] = 0.0;
    }
    return out;
}

std::vector<DesignSymmetry> design_symmetries(StateKind kind) {
    const int d = dimension(kind);
    std::vector<int> perm(static_cast<std::size_t>(d));
    for (int c = 0; c < d; c++) {
        perm[static_cast<std::size_t>(c)] = c;
    }
    std::vector<DesignSymmetry> out;
    do {
        for (int mask = 0; mask < (1 << d); mask++) {
            std::vector<int> flips(static_cast<std::size_t>(d));
            for (int c = 0; c < d; c++) {
                flips[static_cast<std::size_t>(c)] = (mask >> c) & 1 ? -1 : 1;
            }
            out.push_back({perm, flips});
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

Vec3 apply(const DesignSymmetry &g, const Vec3 &r) {
    Vec3 out{};
    for (std::size_t c = 0; c < g.perm.size(); c++) {
        out[c] = g.flips[c] * r[static_cast<std::size_t>(g.perm[c])];
    }
    return out;
}

Dataset apply(const DesignSymmetry &g, const Dataset &d, int shots_per_basis) {
    Dataset out;
    for (std::size_t c = 0; c < g.perm.size(); c++) {
        const int n = d.counts[static_cast<std::size_t>(g.perm[c])];
        out.counts.push_back(g.flips[c] > 0 ? n : shots_per_basis - n);
    }
    return out;
}

std::string check_relative_entropy_axioms(int pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < pairs; k++) {
        const StateKind kind = k % 2 == 0 ? StateKind::Qubit : StateKind::Rebit;
        Vec3 a = random_state(kind, rng);
        if (k % 10 == 0) {
            a = (1.0 / norm(a)) * a;  // pure rho
        }
        const Vec3 b = random_state(kind, rng, 0.99);
        const BlochState rho(kind, a);
        const BlochState sigma(kind, b);
        const double d = relative_entropy(rho, sigma);
        const double oracle = matrix_relative_entropy(a, b);
        if (!(d > 0.0)) {
            return "D(rho||sigma) = " + std::to_string(d) + " for distinct " + describe(a) + ", " + describe(b);
        }
        if (std::abs(d - oracle) > 1e-9 * std::max(1.0, oracle)) {
            return "D disagrees with the matrix oracle at " + describe(a) + ", " + describe(b) + ": " +
                   std::to_string(d) + " vs " + std::to_string(oracle);
        }
        if (relative_entropy(rho, rho) > 1e-10 || relative_entropy(sigma, sigma) > 1e-10) {
            return "D(rho||rho) is not zero at " + describe(a);
        }
        // Commuting pair: sigma along rho's axis.
        const double ra = norm(a);
        if (ra > 1e-6) {
            const double s = 2.0 * u(rng) - 1.0;
            const Vec3 c = (0.99 * s / ra) * a;
            const double kl = scalar_kl(0.5 * (1.0 + ra), 0.5 * (1.0 + 0.99 * s));
            const double dc = relative_entropy(rho, BlochState(kind, c));
            if (std::abs(dc - kl) > 1e-10 * std::max(1.0, kl)) {
                return "commuting reduction fails at " + describe(a) + ", " + describe(c);
            }
        }
        const std::vector<double> rot = random_rotation(kind, rng);
        const double dr = relative_entropy(BlochState(kind, rotate(kind, a, rot)), BlochState(kind, rotate(kind, b, rot)));
        if (std::abs(dr - d) > 1e-12 * std::max(1.0, d)) {
            return "rotation changes D at " + describe(a) + ", " + describe(b);
        }
        const double det = determinant(rho);
        if (!(det >= 0.0 && det <= 0.25)) {
            return "determinant out of [0, 1/4] at " + describe(a);
        }
    }
    return {};
}

std::string check_likelihood_normalization(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (StateKind kind : {StateKind::Coin, StateKind::Rebit, StateKind::Qubit}) {
        for (int m : {1, 2, 5, 9, 16}) {
            const ExperimentDesign design = ExperimentDesign::pauli(kind, m);
            for (int trial = 0; trial < 4; trial++) {
                Vec3 r = random_state(kind, rng);
                if (trial == 0) {
                    r = (1.0 / norm(r)) * r;
                }
                const BlochState rho(kind, project_to_ball(kind, r));
                double total = 0.0;
                for (const Dataset &d : enumerate_datasets(design)) {
                    total += likelihood(design, d, rho);
                }
                if (std::abs(total - 1.0) > 1e-10) {
                    return "likelihoods sum to " + std::to_string(total) + " for " + std::string(kind_name(kind)) +
                           " M=" + std::to_string(m);
                }
                const Dataset d = dataset_at(design, design.dataset_count() / 3);
                std::vector<double> q;
                for (std::size_t b = 0; b < design.num_bases(); b++) {
                    q.push_back(0.5 * (1.0 + dot(design.axis(b), rho.r())));
                }
                const double oracle = binomial_likelihood(design.shots(), d.counts, q);
                if (std::abs(likelihood(design, d, rho) - oracle) > 1e-12 * std::max(1e-300, oracle) + 1e-300) {
                    return "likelihood differs from the binomial oracle";
                }
            }
        }
    }
    return {};
}

std::string check_posterior_mean_optimality(int pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < pairs; k++) {
        const StateKind kind = k % 2 == 0 ? StateKind::Rebit : StateKind::Qubit;
        const ExperimentDesign design = ExperimentDesign::pauli(kind, kind == StateKind::Rebit ? 4 : 2);
        const int count = 2 + k % 6;
        std::vector<BlochState> supports;
        std::vector<double> weights;
        for (int i = 0; i < count; i++) {
            supports.emplace_back(kind, random_state(kind, rng));
            weights.push_back(0.05 + u(rng));
        }
        const DiscretePrior prior = DiscretePrior::normalized(supports, weights);
        const TabulatedEstimator bayes = tabulate_bayes(prior, design);
        std::vector<Vec3> entries;
        for (std::size_t i = 0; i < bayes.size(); i++) {
            Vec3 e{};
            if (k % 3 == 0) {
                e = random_state(kind, rng, 0.999);
            } else {
                // Small perturbation of the optimum: the sharper test.
                Vec3 noise{};
                for (int c = 0; c < dimension(kind); c++) {
                    noise[static_cast<std::size_t>(c)] = 0.01 * g(rng);
                }
                e = bayes.entry(i) + noise;
                if (norm(e) > 0.999) {
                    e = (0.999 / norm(e)) * e;
                }
            }
            entries.push_back(e);
        }
        const TabulatedEstimator competitor(design, entries, "competitor");
        const double rb = bayes_risk(prior, bayes);
        const double rc = bayes_risk(prior, competitor);
        if (!(rb <= rc + 1e-12)) {
            return "posterior mean is beaten on pair " + std::to_string(k) + ": " + std::to_string(rb) + " > " +
                   std::to_string(rc);
        }
    }
    return {};
}

std::string check_estimator_equivariance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto [kind, m] : {std::pair{StateKind::Rebit, 6}, std::pair{StateKind::Qubit, 2}}) {
        const ExperimentDesign design = ExperimentDesign::pauli(kind, m);
        const std::vector<DesignSymmetry> group = design_symmetries(kind);
        std::vector<BlochState> supports;
        for (int i = 0; i < 3; i++) {
            const Vec3 r = random_state(kind, rng);
            for (const DesignSymmetry &gs : group) {
                supports.emplace_back(kind, apply(gs, r));
            }
        }
        const DiscretePrior prior = DiscretePrior::uniform(supports);
        struct Named {
            const char *name;
            TabulatedEstimator table;
            double tol;
        };
        // The numerically maximized estimators are accurate to ~1e-9 in the
        // objective, which bounds their positional accuracy near 1e-7.
        const std::vector<Named> tables = {
            {"linear inversion", tabulate_linear_inversion(design), 1e-12},
            {"mle", tabulate_mle(design), 1e-6},
            {"hml", tabulate_hml(design, 0.04), 1e-6},
            {"bayes", tabulate_bayes(prior, design), 1e-10},
        };
        for (const Named &t : tables) {
            for (const DesignSymmetry &gs : group) {
                for (const Dataset &d : enumerate_datasets(design)) {
                    const Vec3 &lhs = t.table.entry(dataset_index(design, apply(gs, d, m)));
                    const Vec3 rhs = apply(gs, t.table.entry(dataset_index(design, d)));
                    if (distance(lhs, rhs) > t.tol) {
                        return std::string(t.name) + " is not equivariant (" + std::string(kind_name(kind)) +
                               ") at dataset index " + std::to_string(dataset_index(design, d)) + ": " +
                               describe(lhs) + " vs " + describe(rhs);
                    }
                }
            }
        }
    }
    return {};
}

std::string check_hs_sampler_moments(std::uint64_t seed) {
    const std::size_t n = 100000;
    struct Moment {
        StateKind kind;
        double power;
        double expected;
    };
    const Moment moments[] = {
        {StateKind::Qubit, 3.0, 0.5},       {StateKind::Qubit, 2.0, 0.6}, {StateKind::Rebit, 2.0, 0.5},
        {StateKind::Rebit, 1.0, 2.0 / 3.0}, {StateKind::Coin, 2.0, 1.0 / 3.0},
    };
    for (const Moment &mo : moments) {
        const std::vector<BlochState> states = sample_hs_uniform(mo.kind, n, seed);
        double total = 0.0;
        Vec3 mean{};
        for (const BlochState &s : states) {
            if (s.radius() > 1.0) {
                return "sampled state outside the ball";
            }
            total += std::pow(s.radius(), mo.power);
            mean = mean + s.r();
        }
        const double avg = total / static_cast<double>(n);
        if (std::abs(avg - mo.expected) > 0.01) {
            return "E|r|^" + std::to_string(mo.power) + " = " + std::to_string(avg) + " for " +
                   std::string(kind_name(mo.kind));
        }
        if (norm(mean) / static_cast<double>(n) > 0.01) {
            return "sample mean is not centered for " + std::string(kind_name(mo.kind));
        }
        const std::vector<BlochState> again = sample_hs_uniform(mo.kind, 10, seed);
        if (!std::equal(again.begin(), again.end(), states.begin())) {
            return "sampler is not deterministic in its seed";
        }
    }
    return {};
}

}  // namespace tomomax::testing
