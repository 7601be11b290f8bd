#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tomomax/estimators.h"
#include "tomomax/experiment.h"
#include "tomomax/noisycoin.h"
#include "tomomax/prior.h"
#include "tomomax/qstate.h"

namespace tomomax::testing {

// Independent oracles. None of these call into the library's numerics.

/// D(rho || sigma) from explicit 2x2 density matrices and a matrix logarithm.
double matrix_relative_entropy(const Vec3 &rho, const Vec3 &sigma);

/// Classical KL divergence of two binary distributions (p, 1-p), (q, 1-q).
double scalar_kl(double p, double q);

/// Product of binomials, coefficients via lgamma.
double binomial_likelihood(const std::vector<int> &shots, const std::vector<int> &counts, const std::vector<double> &q);

/// Argmax of the hedged log-likelihood (beta = 0: plain likelihood) for a
/// two-basis X/Y rebit design, over a polar grid of about `points` points.
Vec3 rebit_grid_argmax(int m, int nx, int ny, double beta, int points);

/// Sum of 0 <= n <= m of C(m, n) q^n (1-q)^(m-n) f(n).
double binomial_expectation(int m, double q, const std::function<double(int)> &f);

// Random inputs.

Vec3 random_state(StateKind kind, std::mt19937_64 &rng, double max_radius = 1.0);

/// Random rotation applied to both vectors; rebits rotate in the plane.
Vec3 rotate(StateKind kind, const Vec3 &r, const std::vector<double> &matrix);
std::vector<double> random_rotation(StateKind kind, std::mt19937_64 &rng);

// Symmetries of the default Pauli designs: signed permutations of the measured
// axes. They act on Bloch vectors and on datasets.

struct DesignSymmetry {
    std::vector<int> perm;   // new component c takes old component perm[c]
    std::vector<int> flips;  // then multiplied by flips[c] (+1 or -1)
};

std::vector<DesignSymmetry> design_symmetries(StateKind kind);
Vec3 apply(const DesignSymmetry &g, const Vec3 &r);
Dataset apply(const DesignSymmetry &g, const Dataset &d, int shots_per_basis);

// Property suites. Each returns an empty string when it passes, otherwise a
// description of the first failure.

std::string check_relative_entropy_axioms(int pairs, std::uint64_t seed);
std::string check_likelihood_normalization(std::uint64_t seed);
std::string check_posterior_mean_optimality(int pairs, std::uint64_t seed);
std::string check_estimator_equivariance(std::uint64_t seed);
std::string check_hs_sampler_moments(std::uint64_t seed);

}  // namespace tomomax::testing
