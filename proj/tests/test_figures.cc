#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "tomomax/estimators.h"
#include "tomomax/figures.h"

namespace tomomax {
namespace {

std::size_t count(const std::string &text, const std::string &needle) {
    std::size_t n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) {
        n++;
    }
    return n;
}

TEST(GridStats, LinearInversionIsTheUniformSquare) {
    const GridStats s = grid_stats(tabulate_linear_inversion(ExperimentDesign::pauli(StateKind::Rebit, 8)));
    EXPECT_EQ(s.m_x, 8);
    EXPECT_EQ(s.m_y, 8);
    EXPECT_NEAR(s.max_corner_norm, std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(s.min_margin, 1 - std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(s.boundary_spacing_mean, 0.25, 1e-15);
    EXPECT_NEAR(s.boundary_spacing_variance, 0.0, 1e-30);
    EXPECT_NEAR(s.spacing_variance, 0.0, 1e-30);
}

TEST(GridStats, HandBuiltTable) {
    // M = 1 per basis: four vertices, all four edges are boundary edges.
    const ExperimentDesign d = ExperimentDesign::pauli(StateKind::Rebit, 1);
    // Index nx * 2 + ny.
    const TabulatedEstimator t(d, {{0, 0, 0}, {0, 0.5, 0}, {0.3, 0, 0}, {0.3, 0.5, 0}}, "hand");
    const GridStats s = grid_stats(t);
    // Edge lengths 0.3, 0.3, 0.5, 0.5.
    EXPECT_NEAR(s.boundary_spacing_mean, 0.4, 1e-15);
    EXPECT_NEAR(s.boundary_spacing_variance, 0.01, 1e-15);
    EXPECT_NEAR(s.spacing_variance, 0.01, 1e-15);
    EXPECT_NEAR(s.max_corner_norm, std::hypot(0.3, 0.5), 1e-15);
    EXPECT_NEAR(s.min_margin, 1 - std::hypot(0.3, 0.5), 1e-15);
}

TEST(GridStats, HmlInteriorRowsAreUniformAwayFromTheEdge) {
    const GridStats s = grid_stats(tabulate_hml(ExperimentDesign::pauli(StateKind::Rebit, 8), 0.04));
    EXPECT_GT(s.min_margin, 0.0);
    EXPECT_LT(s.max_corner_norm, 1.0);
    EXPECT_GT(s.boundary_spacing_variance, 0.0);
}

TEST(GridStats, RejectsOtherDesigns) {
    EXPECT_THROW(grid_stats(tabulate_hml(ExperimentDesign::pauli(StateKind::Qubit, 2), 0.1)), Error);
    EXPECT_THROW(estimator_grid_svg(tabulate_hml(ExperimentDesign::pauli(StateKind::Qubit, 2), 0.1), "q"), Error);
}

TEST(Svg, GridHasOneLinePerRowAndColumn) {
    const std::string svg = estimator_grid_svg(tabulate_mle(ExperimentDesign::pauli(StateKind::Rebit, 4)), "a<b");
    EXPECT_EQ(count(svg, "<polyline"), 10u);
    EXPECT_EQ(count(svg, "<circle"), 1u);
    EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
}

TEST(Svg, ProfilesClipNonFiniteValues) {
    const std::string svg = risk_profile_svg({{"finite", {{0, 0.1}, {1, 0.2}}}, {"ml", {{0, kInf}, {1, kInf}}}}, "p");
    EXPECT_EQ(svg.find("inf"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_NE(svg.find("finite"), std::string::npos);
}

}  // namespace
}  // namespace tomomax
