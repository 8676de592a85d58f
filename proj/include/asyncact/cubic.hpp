#pragma once

#include <array>
#include <optional>
#include <vector>

namespace asyncact {

/// Real roots of a u^3 + b u^2 + c u + d, ascending, Newton-polished.
/// Falls back to the quadratic/linear formulas when the leading coefficients
/// vanish relative to the rest.
std::vector<double> real_cubic_roots(double a, double b, double c, double d);

/// Scalars of the per-coordinate local subproblem
///   log(1 + xi1 u) - xi2 u / (1 + xi1 u) + lambda (u - b) + mu/2 (u - b)^2.
struct CubicCoeffs {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double b_target = 0.0;
};

/// Coefficients (u^3, u^2, u, 1) of
///   (1 + xi1 u) xi1 - xi2 + (lambda + mu (u - b)) (1 + xi1 u)^2.
std::array<double, 4> stationary_polynomial(const CubicCoeffs& c);

double coordinate_objective(const CubicCoeffs& c, double u);

/// Real stationary points with 1 + xi1 u > 1e-12.
std::vector<double> cubic_stationary_points(const CubicCoeffs& c);

/// Stationary point with the smallest objective, if any exists.
std::optional<double> coordinate_minimizer(const CubicCoeffs& c);

/// Box-constrained minimizer on [0,1] with lambda = mu = 0 (single-AP
/// covariance CD step): candidates are the clipped stationary point and the
/// endpoints.
double box_coordinate_minimizer(double xi1, double xi2);

}  // namespace asyncact
