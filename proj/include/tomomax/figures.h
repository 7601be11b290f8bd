#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tomomax/estimators.h"

namespace tomomax {

/// Summary numbers of a rebit estimator drawn as a distorted grid: vertex
/// (n_x, n_y) sits at the estimate for that dataset.
struct GridStats {
    int m_x = 0;
    int m_y = 0;
    double max_corner_norm = 0.0;  // largest |r| over the four corner vertices
    double min_margin = 0.0;       // min over vertices of 1 - |r|
    /// Variance of the distances between neighbouring vertices along the four
    /// outermost grid lines (n_x or n_y at 0 or M), pooled.
    double boundary_spacing_variance = 0.0;
    double boundary_spacing_mean = 0.0;
    /// The same over every grid line.
    double spacing_variance = 0.0;
    double spacing_mean = 0.0;
};

/// Requires a rebit design with exactly two bases.
GridStats grid_stats(const TabulatedEstimator &estimator);

/// SVG drawing of the grid of estimates and the unit circle.
std::string estimator_grid_svg(const TabulatedEstimator &estimator, const std::string &title);

struct ProfileCurve {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (t, risk)
};

/// SVG line plot of risk profiles; non-finite values are clipped to the top edge.
std::string risk_profile_svg(const std::vector<ProfileCurve> &curves, const std::string &title);

}  // namespace tomomax
