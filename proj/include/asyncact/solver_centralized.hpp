#pragma once

#include <optional>
#include <vector>

#include "asyncact/model.hpp"
#include "asyncact/types.hpp"

namespace asyncact {

struct SolveOptions {
  double rho = 0.16;
  int max_iters = 500;
  double tol_step = 1e-6;
  double backtrack = 0.5;
  int max_halvings = 30;
  // Bounds on the Barzilai-Borwein step before backtracking.
  double min_step = 1e-14;
  double max_step = 1e6;

  void validate() const;
};

/// One row of a per-iteration solver trace.
struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double step = 0.0;
  double change = 0.0;      // l-inf change of b
  double residual = 0.0;    // consensus residual for the distributed solvers
  double lagrangian = 0.0;  // augmented Lagrangian for the distributed solvers
};

struct Alg1State {
  RVec b;
  RVec grad;  // gradient of the smooth part at b
  double objective = 0.0;
  double step = 0.0;
  int iter = 0;
  double last_change = 0.0;
  bool converged = false;
  bool stalled = false;

  RVec prev_b;
  RVec prev_grad;
  bool has_prev = false;
};

struct SolveResult {
  RVec b;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
};

/// Closed-form minimizer of the block subproblem of the proximal step: the
/// first maximizer of alpha gets `shift` added, then everything is clipped
/// to [0,1].
RVec prox_block_update(const RVec& alpha, double shift);

/// prox_block_update applied to every block of `alpha`.
RVec prox_update(const RVec& alpha, double shift, const BlockLayout& layout);

Alg1State alg1_init(const ReceivedData& data, const SolveOptions& opts, RVec b0);

/// One proximal-gradient iteration with a local Lipschitz step and monotone
/// backtracking. Sets `converged` when the l-inf change drops below tol_step
/// and `stalled` when backtracking is exhausted.
void alg1_step(Alg1State& state, const ReceivedData& data, const SolveOptions& opts);

SolveResult alg1_solve(const ReceivedData& data, const SolveOptions& opts,
                       std::optional<RVec> init = std::nullopt);

}  // namespace asyncact
