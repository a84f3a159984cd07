#pragma once

#include <cstddef>
#include <span>

namespace llnlab {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

/// Survival function of the chi-square law with dof degrees of freedom.
double chi_square_sf(double stat, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness of fit of observed counts against cell probabilities.
/// Cells with zero expected probability must have zero observed count.
ChiSquareResult chi_square_gof(std::span<const std::size_t> observed,
                               std::span<const double> expected_probs);

/// Homogeneity test for two count vectors over the same cells.
/// Cells empty in both samples are dropped from the dof.
ChiSquareResult chi_square_two_sample(std::span<const std::size_t> a,
                                      std::span<const std::size_t> b);

} // namespace llnlab
