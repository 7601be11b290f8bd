#pragma once

#include <functional>
#include <vector>

namespace tomomax {

/// Solves A x = b for a symmetric positive-definite n x n matrix (row-major), n <= 3.
/// Returns false when A is not numerically positive definite.
bool solve_spd(const double *a, const double *b, double *x, int n);

struct NelderMeadOptions {
    double initial_step = 0.1;
    double f_tol = 1e-13;
    double x_tol = 1e-11;
    int max_evals = 4000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Minimizes fn from x0. Non-finite values are treated as +inf (worse than any
/// finite point), so infeasible regions can be signalled that way.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double> &)> &fn,
    std::vector<double> x0,
    const NelderMeadOptions &options = {});

/// Golden-section maximization of a unimodal function on [lo, hi].
double golden_section_max(const std::function<double(double)> &fn, double lo, double hi, double x_tol = 1e-12);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(const std::vector<double> &v);

}  // namespace tomomax
