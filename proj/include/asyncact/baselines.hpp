#pragma once

#include <span>
#include <utility>
#include <vector>

#include "asyncact/likelihood.hpp"
#include "asyncact/solver_centralized.hpp"

namespace asyncact {

/// Per-AP (xi1_m, xi2_m) pairs of one coordinate; the objective is
///   sum_m log(1 + xi1_m u) - xi2_m u / (1 + xi1_m u)  on [0,1].
struct Scalar1DProblem {
  std::vector<std::pair<double, double>> coeffs;

  double value(double u) const;
};

/// Global minimizer on [0,1]: endpoints, each AP's clipped single-cell
/// stationary point and a coarse grid seed a Brent refinement around the
/// best bracket.
double minimize_1d_multiap(const Scalar1DProblem& prob);

struct BaselineOptions {
  int max_sweeps = 200;
  double tol = 1e-6;
};

struct BaselineResult {
  RVec b;
  std::vector<double> objective;  // nll after every sweep (CD-E) / block commit (BCD)
  int sweeps = 0;
};

/// Coordinate descent on the box-relaxed problem without the one-delay
/// constraint, then keeps only the largest entry of every block.
BaselineResult cde_solve(const ReceivedData& data, const BaselineOptions& opts = {});

/// Block coordinate descent with the one-delay constraint enforced: each
/// block takes the best of the all-zero block and the T+1 single-delay
/// candidates.
BaselineResult bcd_solve(const ReceivedData& data, const BaselineOptions& opts = {});

}  // namespace asyncact
