#include "tomomax/estimators.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "tomomax/optimize.h"
#include "tomomax/parallel.h"

namespace tomomax {

const Vec3 &estimate_vector(const Estimate &estimate) {
    if (const auto *s = std::get_if<BlochState>(&estimate)) {
        return s->r();
    }
    return std::get<UnphysicalPoint>(estimate).r;
}

Estimate linear_inversion(const ExperimentDesign &design, const Dataset &dataset) {
    check_dataset(design, dataset);
    const int d = dimension(design.kind());
    Vec3 r{};
    if (design.orthonormal_axes() && static_cast<int>(design.num_bases()) == d) {
        for (std::size_t b = 0; b < design.num_bases(); b++) {
            double y = 2.0 * dataset.counts[b] / design.shots(b) - 1.0;
            r = r + y * design.axis(b);
        }
    } else {
        double a[9] = {};
        double rhs[3] = {};
        for (std::size_t b = 0; b < design.num_bases(); b++) {
            const Vec3 &ax = design.axis(b);
            double m = design.shots(b);
            double y = 2.0 * dataset.counts[b] / design.shots(b) - 1.0;
            for (int i = 0; i < d; i++) {
                rhs[i] += m * y * ax[i];
                for (int j = 0; j < d; j++) {
                    a[i * d + j] += m * ax[i] * ax[j];
                }
            }
        }
        double x[3] = {};
        if (!solve_spd(a, rhs, x, d)) {
            throw Error(ErrorCode::InvalidArgument, "design axes do not span the state space");
        }
        for (int i = 0; i < d; i++) {
            r[i] = x[i];
        }
    }
    if (norm(r) <= 1.0 + kPhysSlack) {
        return BlochState(design.kind(), r);
    }
    return UnphysicalPoint{design.kind(), r};
}

double hedged_log_objective(const ExperimentDesign &design, const Dataset &dataset, const Vec3 &r, double beta) {
    double total = 0.0;
    for (std::size_t b = 0; b < design.num_bases(); b++) {
        double q = 0.5 * (1.0 + dot(design.axis(b), r));
        int n = dataset.counts[b];
        int m = design.shots(b);
        if (n > 0) {
            if (q <= 0.0) {
                return -kInf;
            }
            total += n * std::log(q);
        }
        if (m - n > 0) {
            if (q >= 1.0) {
                return -kInf;
            }
            total += (m - n) * std::log1p(-q);
        }
    }
    if (beta > 0.0) {
        double s = 1.0 - dot(r, r);
        if (s <= 0.0) {
            return -kInf;
        }
        total += beta * std::log(s);
    }
    return total;
}

namespace {

struct NewtonResult {
    Vec3 r{};
    double value = -kInf;
    bool converged = false;
};

// Damped Newton ascent of the (strictly) concave hedged log objective inside the
// open ball.
NewtonResult newton_hedged(const ExperimentDesign &design, const Dataset &dataset, double beta, Vec3 r) {
    const int d = dimension(design.kind());
    NewtonResult result;
    double f = hedged_log_objective(design, dataset, r, beta);
    for (int iter = 0; iter < 500; iter++) {
        double g[3] = {};
        double h[9] = {};
        for (std::size_t b = 0; b < design.num_bases(); b++) {
            const Vec3 &a = design.axis(b);
            double q = 0.5 * (1.0 + dot(a, r));
            double n = dataset.counts[b];
            double mn = design.shots(b) - dataset.counts[b];
            double c1 = (n > 0 ? n / q : 0.0) - (mn > 0 ? mn / (1.0 - q) : 0.0);
            double c2 = (n > 0 ? n / (q * q) : 0.0) + (mn > 0 ? mn / ((1.0 - q) * (1.0 - q)) : 0.0);
            for (int i = 0; i < d; i++) {
                g[i] += 0.5 * c1 * a[i];
                for (int j = 0; j < d; j++) {
                    h[i * d + j] += 0.25 * c2 * a[i] * a[j];
                }
            }
        }
        if (beta > 0.0) {
            double s = 1.0 - dot(r, r);
            for (int i = 0; i < d; i++) {
                g[i] -= 2.0 * beta * r[i] / s;
                h[i * d + i] += 2.0 * beta / s;
                for (int j = 0; j < d; j++) {
                    h[i * d + j] += 4.0 * beta * r[i] * r[j] / (s * s);
                }
            }
        }
        // h holds the negated Hessian (positive definite).
        double step[3] = {};
        if (!solve_spd(h, g, step, d)) {
            // Singular curvature: fall back to a gradient step.
            for (int i = 0; i < d; i++) {
                step[i] = g[i];
            }
        }
        double decrement = 0.0;
        for (int i = 0; i < d; i++) {
            decrement += g[i] * step[i];
        }
        // The objective is only resolved to a few ulps of |f|; below that the line
        // search cannot tell steps apart, so finish with a plain Newton step.
        const double resolution = 1e-14 * (1.0 + std::fabs(f));
        if (!(decrement > resolution)) {
            Vec3 trial = r;
            for (int i = 0; i < d; i++) {
                trial[i] += step[i];
            }
            if (dot(trial, trial) < 1.0) {
                double ft = hedged_log_objective(design, dataset, trial, beta);
                if (ft >= f - resolution) {
                    r = trial;
                    f = ft;
                }
            }
            result.converged = true;
            break;
        }
        double t = 1.0;
        bool moved = false;
        while (t > 1e-30) {
            Vec3 trial = r;
            for (int i = 0; i < d; i++) {
                trial[i] += t * step[i];
            }
            if (dot(trial, trial) < 1.0) {
                double ft = hedged_log_objective(design, dataset, trial, beta);
                if (ft >= f + 0.25 * t * decrement) {
                    r = trial;
                    f = ft;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!moved) {
            result.converged = decrement < std::max(1e-16, 100.0 * resolution);
            break;
        }
    }
    result.r = r;
    result.value = f;
    return result;
}

Vec3 unit_on_sphere(const std::vector<double> &angles) {
    double theta = angles[0];
    double phi = angles[1];
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Maximizes the likelihood over pure states |r| = 1.
NewtonResult boundary_max(const ExperimentDesign &design, const Dataset &dataset) {
    const int d = dimension(design.kind());
    auto objective = [&](const Vec3 &u) { return hedged_log_objective(design, dataset, u, 0.0); };
    NewtonResult best;
    if (d == 1) {
        for (double z : {-1.0, 1.0}) {
            double f = objective({z, 0, 0});
            if (f > best.value) {
                best.value = f;
                best.r = {z, 0, 0};
            }
        }
        best.converged = true;
        return best;
    }
    if (d == 2) {
        const int grid = 720;
        double best_theta = 0.0;
        for (int k = 0; k < grid; k++) {
            double theta = 2.0 * std::numbers::pi * k / grid;
            double f = objective({std::cos(theta), std::sin(theta), 0});
            if (f > best.value) {
                best.value = f;
                best_theta = theta;
            }
        }
        double span = 2.0 * std::numbers::pi / grid;
        double theta = golden_section_max(
            [&](double t) { return objective({std::cos(t), std::sin(t), 0}); }, best_theta - span, best_theta + span,
            1e-13);
        Vec3 u{std::cos(theta), std::sin(theta), 0};
        double f = objective(u);
        if (f >= best.value) {
            best.value = f;
            best.r = u;
        } else {
            best.r = {std::cos(best_theta), std::sin(best_theta), 0};
        }
        best.converged = true;
        return best;
    }
    // Qubit: Fibonacci grid then Nelder-Mead in spherical angles.
    const int grid = 2000;
    std::vector<double> best_angles{0.0, 0.0};
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < grid; k++) {
        double z = 1.0 - 2.0 * (k + 0.5) / grid;
        double theta = std::acos(z);
        double phi = std::fmod(golden * k, 2.0 * std::numbers::pi);
        double f = objective(unit_on_sphere({theta, phi}));
        if (f > best.value) {
            best.value = f;
            best_angles = {theta, phi};
        }
    }
    NelderMeadOptions opts;
    opts.initial_step = 0.05;
    opts.f_tol = 1e-14;
    opts.x_tol = 1e-12;
    auto nm = nelder_mead([&](const std::vector<double> &x) { return -objective(unit_on_sphere(x)); }, best_angles, opts);
    if (-nm.value >= best.value) {
        best.value = -nm.value;
        best_angles = nm.x;
    }
    best.r = unit_on_sphere(best_angles);
    best.converged = nm.converged;
    return best;
}


// Posterior mean from unnormalized posterior weights. Near the boundary 1 - |v|/mass
// loses all precision, so the eigenvalue deficit is summed term by term; a
// positive deficit too small to represent keeps the estimate just inside the
// sphere rather than exactly pure.
template <class Weight>
Vec3 posterior_mean(StateKind kind, const DiscretePrior &prior, double mass, const Vec3 &v, Weight weight) {
    const Vec3 mean = (1.0 / mass) * v;
    const double radius = norm(mean);
    if (radius < 1.0 - 1e-8) {
        return mean;
    }
    const Vec3 u = (1.0 / radius) * mean;
    double deficit = 0.0;
    for (std::size_t i = 0; i < prior.size(); i++) {
        deficit += weight(i) * std::max(0.0, 1.0 - dot(prior.support(i).r(), u));
    }
    deficit /= mass;
    if (deficit <= 0.0) {
        return project_to_ball(kind, mean);
    }
    return std::min(1.0 - deficit, std::nextafter(1.0, 0.0)) * u;
}

}  // namespace

BlochState mle(const ExperimentDesign &design, const Dataset &dataset) {
    check_dataset(design, dataset);
    const int d = dimension(design.kind());
    if (design.orthonormal_axes() && static_cast<int>(design.num_bases()) == d) {
        Estimate li = linear_inversion(design, dataset);
        if (const auto *s = std::get_if<BlochState>(&li)) {
            return *s;
        }
        // The unconstrained maximizer lies outside the ball, so the constrained
        // one is on the sphere.
        return BlochState(design.kind(), boundary_max(design, dataset).r);
    }
    NewtonResult interior = newton_hedged(design, dataset, 0.0, Vec3{});
    NewtonResult boundary = boundary_max(design, dataset);
    if (interior.converged && dot(interior.r, interior.r) < 1.0 - 1e-9 && interior.value >= boundary.value) {
        return BlochState(design.kind(), interior.r);
    }
    return BlochState(design.kind(), boundary.value >= interior.value ? boundary.r : interior.r);
}

BlochState hml(const ExperimentDesign &design, const Dataset &dataset, double beta) {
    check_dataset(design, dataset);
    if (!(beta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "hedging exponent must be positive");
    }
    NewtonResult res = newton_hedged(design, dataset, beta, Vec3{});
    if (!res.converged) {
        throw Error(ErrorCode::InnerSolverFailure, "hedged likelihood maximization did not converge");
    }
    return BlochState(design.kind(), res.r);
}

BlochState bayes_mean(const DiscretePrior &prior, const ExperimentDesign &design, const Dataset &dataset) {
    if (prior.kind() != design.kind()) {
        throw Error(ErrorCode::KindMismatch, "prior kind differs from design kind");
    }
    std::vector<double> logw(prior.size());
    double top = -kInf;
    for (std::size_t i = 0; i < prior.size(); i++) {
        logw[i] = prior.weight(i) > 0.0 ? std::log(prior.weight(i)) + log_likelihood(design, dataset, prior.support(i))
                                        : -kInf;
        top = std::max(top, logw[i]);
    }
    if (top == -kInf) {
        throw Error(ErrorCode::ZeroEvidence, "dataset has zero probability under every support");
    }
    double mass = 0.0;
    Vec3 v{};
    for (std::size_t i = 0; i < prior.size(); i++) {
        double w = std::exp(logw[i] - top);
        mass += w;
        v = v + w * prior.support(i).r();
    }
    return BlochState(design.kind(), posterior_mean(design.kind(), prior, mass, v, [&](std::size_t i) {
                          return std::exp(logw[i] - top);
                      }));
}

TabulatedEstimator::TabulatedEstimator(
    ExperimentDesign design, std::vector<Vec3> entries, std::string provenance, bool allow_unphysical)
    : design_(std::move(design)),
      entries_(std::move(entries)),
      provenance_(std::move(provenance)),
      allow_unphysical_(allow_unphysical) {
    if (entries_.size() != design_.dataset_count()) {
        throw Error(
            ErrorCode::ShapeMismatch, "table has " + std::to_string(entries_.size()) + " entries, design needs " +
                                          std::to_string(design_.dataset_count()));
    }
    for (Vec3 &r : entries_) {
        if (allow_unphysical_) {
            for (int k = dimension(design_.kind()); k < 3; k++) {
                if (r[k] != 0.0) {
                    throw Error(ErrorCode::ShapeMismatch, "table entry has components beyond the state dimension");
                }
            }
        } else {
            r = BlochState(design_.kind(), r).r();
        }
    }
}

bool TabulatedEstimator::all_physical() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Vec3 &r) { return norm(r) <= 1.0 + kPhysSlack; });
}

Estimate TabulatedEstimator::estimate(const Dataset &dataset) const {
    const Vec3 &r = entries_[dataset_index(design_, dataset)];
    if (norm(r) <= 1.0 + kPhysSlack) {
        return BlochState(design_.kind(), r);
    }
    return UnphysicalPoint{design_.kind(), r};
}

TabulatedEstimator tabulate(
    const EstimatorFn &fn,
    const ExperimentDesign &design,
    std::string provenance,
    bool allow_unphysical,
    std::uint64_t cap) {
    DatasetRange range = enumerate_datasets(design, cap);
    std::vector<Vec3> entries(range.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        Estimate e = fn(dataset_at(design, i));
        if (!allow_unphysical && std::holds_alternative<UnphysicalPoint>(e)) {
            throw Error(ErrorCode::UnphysicalArgument, "estimator produced an unphysical entry");
        }
        entries[i] = estimate_vector(e);
    });
    return TabulatedEstimator(design, std::move(entries), std::move(provenance), allow_unphysical);
}

TabulatedEstimator tabulate_linear_inversion(const ExperimentDesign &design, std::uint64_t cap) {
    return tabulate(
        [&](const Dataset &d) { return linear_inversion(design, d); }, design, "linear inversion", true, cap);
}

TabulatedEstimator tabulate_mle(const ExperimentDesign &design, std::uint64_t cap) {
    return tabulate([&](const Dataset &d) -> Estimate { return mle(design, d); }, design, "maximum likelihood", false, cap);
}

TabulatedEstimator tabulate_hml(const ExperimentDesign &design, double beta, std::uint64_t cap) {
    char label[64];
    std::snprintf(label, sizeof(label), "hedged maximum likelihood, beta=%g", beta);
    return tabulate([&](const Dataset &d) -> Estimate { return hml(design, d, beta); }, design, label, false, cap);
}

TabulatedEstimator tabulate_constant(const ExperimentDesign &design, const BlochState &state) {
    if (state.kind() != design.kind()) {
        throw Error(ErrorCode::KindMismatch, "constant estimate kind differs from design kind");
    }
    std::vector<Vec3> entries(design.dataset_count(), state.r());
    return TabulatedEstimator(design, std::move(entries), "constant estimator");
}

TabulatedEstimator tabulate_bayes(
    const DiscretePrior &prior, const ExperimentDesign &design, std::string provenance, std::uint64_t cap) {
    if (prior.kind() != design.kind()) {
        throw Error(ErrorCode::KindMismatch, "prior kind differs from design kind");
    }
    DatasetLayout layout(design, cap);
    const std::size_t k_count = prior.size();
    const std::size_t stride = layout.pmf_size();
    std::vector<double> log_pmfs(k_count * stride);
    std::vector<double> log_w(k_count);
    for (std::size_t i = 0; i < k_count; i++) {
        layout.fill_log_pmfs(prior.support(i).r(), log_pmfs.data() + i * stride);
        log_w[i] = prior.weight(i) > 0.0 ? std::log(prior.weight(i)) : -kInf;
    }
    const std::size_t nb = layout.num_bases();
    std::vector<Vec3> entries(layout.num_datasets());
    parallel_blocks(layout.num_datasets(), 256, [&](std::size_t, std::size_t begin, std::size_t end) {
        Dataset d = dataset_at(design, begin);
        std::vector<std::size_t> cols(nb);
        std::vector<double> lw(k_count);
        for (std::size_t idx = begin; idx < end; idx++) {
            for (std::size_t b = 0; b < nb; b++) {
                cols[b] = layout.pmf_offset(b) + static_cast<std::size_t>(d.counts[b]);
            }
            double top = -kInf;
            for (std::size_t i = 0; i < k_count; i++) {
                const double *lp = log_pmfs.data() + i * stride;
                double s = log_w[i];
                for (std::size_t b = 0; b < nb; b++) {
                    s += lp[cols[b]];
                }
                lw[i] = s;
                top = std::max(top, s);
            }
            if (top == -kInf) {
                throw Error(ErrorCode::ZeroEvidence, "dataset " + std::to_string(idx) + " has zero evidence");
            }
            double mass = 0.0;
            Vec3 v{};
            for (std::size_t i = 0; i < k_count; i++) {
                if (lw[i] == -kInf) {
                    continue;
                }
                double w = std::exp(lw[i] - top);
                mass += w;
                v = v + w * prior.support(i).r();
            }
            entries[idx] = posterior_mean(design.kind(), prior, mass, v, [&](std::size_t i) {
                return lw[i] == -kInf ? 0.0 : std::exp(lw[i] - top);
            });
            for (std::size_t b = nb; b-- > 0;) {
                if (++d.counts[b] <= design.shots(b)) {
                    break;
                }
                d.counts[b] = 0;
            }
        }
    });
    return TabulatedEstimator(design, std::move(entries), std::move(provenance));
}

}  // namespace tomomax
