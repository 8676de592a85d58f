#include "asyncact/solver_centralized.hpp"

#include <algorithm>
#include <cmath>

#include "asyncact/likelihood.hpp"

namespace asyncact {

void SolveOptions::validate() const {
  if (!(rho > 0.0)) throw ConfigError("rho: must be positive");
  if (!(tol_step > 0.0)) throw ConfigError("tol_step: must be positive");
  if (max_iters < 1) throw ConfigError("max_iters: must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtrack: must lie in (0,1)");
  if (max_halvings < 0) throw ConfigError("max_halvings: must be non-negative");
}

RVec prox_block_update(const RVec& alpha, double shift) {
  Eigen::Index tau = 0;
  alpha.maxCoeff(&tau);  // first maximizer
  RVec out = alpha;
  out(tau) += shift;
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

RVec prox_update(const RVec& alpha, double shift, const BlockLayout& layout) {
  RVec out(alpha.size());
  const auto len = static_cast<Eigen::Index>(layout.block_len);
  for (std::size_t k = 0; k < layout.num_devices; ++k) {
    const auto off = static_cast<Eigen::Index>(layout.index(k, 0));
    out.segment(off, len) = prox_block_update(alpha.segment(off, len), shift);
  }
  return out;
}

Alg1State alg1_init(const ReceivedData& data, const SolveOptions& opts, RVec b0) {
  Alg1State st;
  st.b = std::move(b0);
  st.grad = nll_gradient(st.b, data, opts.rho);
  st.objective = penalized_cost(st.b, data, opts.rho);
  return st;
}

void alg1_step(Alg1State& st, const ReceivedData& data, const SolveOptions& opts) {
  const BlockLayout lay = data.layout();

  double eta = 0.0;
  if (st.has_prev) {
    const double db = (st.b - st.prev_b).norm();
    const double dd = (st.grad - st.prev_grad).norm();
    eta = dd > 0.0 ? db / dd : st.step / opts.backtrack;
  } else {
    const double gmax = st.grad.cwiseAbs().maxCoeff();
    eta = gmax > 0.0 ? 1.0 / gmax : 1.0;
  }
  eta = std::clamp(eta, opts.min_step, opts.max_step);

  ++st.iter;
  for (int h = 0; h <= opts.max_halvings; ++h, eta *= opts.backtrack) {
    RVec cand = prox_update(st.b - eta * st.grad, eta * opts.rho, lay);
    const double change = (cand - st.b).cwiseAbs().maxCoeff();
    if (change == 0.0) {
      st.step = eta;
      st.last_change = 0.0;
      st.converged = true;
      return;
    }
    double obj = 0.0;
    try {
      obj = penalized_cost(cand, data, opts.rho);
    } catch (const NumericalError&) {
      continue;
    }
    if (obj <= st.objective) {
      st.prev_b = std::move(st.b);
      st.prev_grad = std::move(st.grad);
      st.has_prev = true;
      st.b = std::move(cand);
      st.grad = nll_gradient(st.b, data, opts.rho);
      st.objective = obj;
      st.step = eta;
      st.last_change = change;
      st.converged = change < opts.tol_step;
      return;
    }
  }
  st.stalled = true;
  st.converged = true;
  st.last_change = 0.0;
}

SolveResult alg1_solve(const ReceivedData& data, const SolveOptions& opts,
                       std::optional<RVec> init) {
  opts.validate();
  RVec b0 = init ? std::move(*init) : RVec::Zero(static_cast<Eigen::Index>(data.layout().size()));
  Alg1State st = alg1_init(data, opts, std::move(b0));

  SolveResult res;
  res.trace.push_back({0, st.objective, 0.0, 0.0, 0.0});
  while (st.iter < opts.max_iters && !st.converged) {
    alg1_step(st, data, opts);
    res.trace.push_back({st.iter, st.objective, st.step, st.last_change, 0.0});
  }
  res.b = std::move(st.b);
  res.iterations = st.iter;
  res.converged = st.converged;
  return res;
}

}  // namespace asyncact
