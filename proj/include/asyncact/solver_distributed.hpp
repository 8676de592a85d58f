#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "asyncact/cubic.hpp"
#include "asyncact/fronthaul.hpp"
#include "asyncact/likelihood.hpp"
#include "asyncact/solver_centralized.hpp"

namespace asyncact {

struct AdmmOptions {
  double rho = 0.16;
  double mu = 0.08;
  double delta = 1e-3;
  int max_iters = 100;
  double tol = 1e-6;
  // x-update: CD sweeps per outer iteration, stopped early once the largest
  // coordinate move falls below cd_tol. One sweep by default; raise it for an
  // (approximately) exact x-minimization.
  int cd_max_sweeps = 1;
  double cd_tol = 1e-11;
  // box-constrained local detection that initializes every x_m
  int init_max_sweeps = 100;
  double init_tol = 1e-8;
  // record the spectral norm of the local Hessian at every iterate
  bool track_curvature = false;

  void validate() const;
};

/// Consensus state; x_m lives inside caches[m].
struct DistributedState {
  RVec b;
  std::vector<CovCache> caches;
  std::vector<RVec> lambda;
  int iter = 0;

  const RVec& x(int m) const { return caches[static_cast<std::size_t>(m)].x(); }
};

struct DistributedResult {
  RVec b;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
  BitLedger ledger;
  std::vector<double> curvature;  // max measured L_m per iteration (when tracked)
  int rejected_moves = 0;
  bool lagrangian_monotone = true;
};

struct SweepStats {
  double max_change = 0.0;
  int rejected = 0;
  int sweeps = 0;
};

/// Sum over APs of the uplink messages mu x_m + lambda_m.
RVec admm_aggregate(std::span<const RVec> x, std::span<const RVec> lambda, double mu);

/// Closed-form CPU update of the proximal ADMM b-subproblem.
RVec b_update_admm(const RVec& b_prev, const RVec& aggregate, int num_aps, double rho,
                   double mu, double delta, const BlockLayout& layout);

RVec b_update_admm(const RVec& b_prev, std::span<const RVec> x, std::span<const RVec> lambda,
                   double rho, double mu, double delta, const BlockLayout& layout);

/// `n_sweeps` passes of exact coordinate minimization of
///   f_m(x) + lambda^T (x - b) + mu/2 ||x - b||^2
/// over the unconstrained x held by `cache`, in (k, t) ascending order.
SweepStats local_cd_sweep(CovCache& cache, const RVec& b, const RVec& lambda, double mu,
                          int n_sweeps = 1);

/// local_cd_sweep until the largest move is below tol or max_sweeps is hit.
SweepStats local_cd_solve(CovCache& cache, const RVec& b, const RVec& lambda, double mu,
                          int max_sweeps, double tol);

/// Box-constrained single-AP detection min_{x in [0,1]} f_m(x) by CD.
SweepStats local_detection_solve(CovCache& cache, int max_sweeps, double tol);

RVec dual_update(const RVec& lambda, const RVec& x, const RVec& b, double mu);

/// f_m(x) + lambda^T (x - b) + mu/2 ||x - b||^2.
double local_objective(const RVec& x, const ReceivedData& data, int m, const RVec& b,
                       const RVec& lambda, double mu);

double augmented_lagrangian(const DistributedState& st, const ReceivedData& data, double rho,
                            double mu);

/// b = 0, lambda = 0, x_m = local detection at each AP.
DistributedState distributed_init(const ReceivedData& data, const AdmmOptions& opts);

/// Called after every iteration, once the duals are updated.
using IterateObserver = std::function<void(const DistributedState&)>;

DistributedResult alg2_solve(const ReceivedData& data, const AdmmOptions& opts,
                             const IterateObserver& observer = {});

/// Copy of `data` whose sample covariances are replaced by `targets` (Y dropped).
ReceivedData with_target_covariances(const ReceivedData& data, std::vector<CMat> targets);

/// CPU update of the accelerated scheme: the centralized proximal-gradient
/// solver run against the covariances implied by the received x_m,
/// warm-started at `b`.
RVec alg3_b_update(const RVec& b, std::span<const RVec> x_received, const ReceivedData& data,
                   const SolveOptions& inner);

struct Alg3Options {
  AdmmOptions admm;  // admm.max_iters is the iteration count I
  SolveOptions inner{.max_iters = 50};
  std::optional<int> bits;  // quantization bits per scalar; nullopt = ideal links

  Alg3Options() { admm.max_iters = 3; }
};

DistributedResult alg3_solve(const ReceivedData& data, const Alg3Options& opts);

}  // namespace asyncact
