#include "asyncact/solver_distributed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asyncact {

void AdmmOptions::validate() const {
  if (!(rho > 0.0)) throw ConfigError("rho: must be positive");
  if (!(mu > 0.0)) throw ConfigError("mu: must be positive");
  if (!(delta > 0.0)) throw ConfigError("delta: must be positive");
  if (max_iters < 1) throw ConfigError("max_iters: must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol: must be positive");
  if (cd_max_sweeps < 1) throw ConfigError("cd_max_sweeps: must be positive");
}

RVec admm_aggregate(std::span<const RVec> x, std::span<const RVec> lambda, double mu) {
  RVec acc = RVec::Zero(x.front().size());
  for (std::size_t m = 0; m < x.size(); ++m) acc += mu * x[m] + lambda[m];
  return acc;
}

RVec b_update_admm(const RVec& b_prev, const RVec& aggregate, int num_aps, double rho,
                   double mu, double delta, const BlockLayout& layout) {
  const double denom = delta + num_aps * mu;
  const RVec beta = (delta * b_prev + aggregate - RVec::Constant(b_prev.size(), rho)) / denom;
  return prox_update(beta, rho / denom, layout);
}

RVec b_update_admm(const RVec& b_prev, std::span<const RVec> x, std::span<const RVec> lambda,
                   double rho, double mu, double delta, const BlockLayout& layout) {
  return b_update_admm(b_prev, admm_aggregate(x, lambda, mu), static_cast<int>(x.size()), rho,
                       mu, delta, layout);
}

SweepStats local_cd_sweep(CovCache& cache, const RVec& b, const RVec& lambda, double mu,
                          int n_sweeps) {
  SweepStats stats;
  const auto n = static_cast<std::size_t>(b.size());
  const int block = static_cast<int>(cache.block_len());
  for (int s = 0; s < n_sweeps; ++s) {
    double max_change = 0.0;
    for (std::size_t idx = 0; idx < n; ++idx) {
      const int k = static_cast<int>(idx) / block;
      const int t = static_cast<int>(idx) % block;
      const auto i = static_cast<Eigen::Index>(idx);
      const double cur = cache.x()(i);
      // Without this coordinate the covariance can lose definiteness (other
      // coordinates negative); then measure the step from the current value.
      LeaveOneOut loo = cache.leave_one_out(k, t);
      double base = 0.0;
      if (!loo.ok) {
        loo = cache.increment(k, t);
        base = cur;
      }
      const CubicCoeffs c{loo.xi1, loo.xi2, lambda(i), mu, b(i) - base};
      const auto d = coordinate_minimizer(c);
      if (!d || !(coordinate_objective(c, *d) <= coordinate_objective(c, cur - base))) continue;
      const double u = base + *d;
      if (!cache.set(k, t, u)) {
        ++stats.rejected;
        continue;
      }
      max_change = std::max(max_change, std::abs(u - cur));
    }
    stats.max_change = max_change;
    ++stats.sweeps;
  }
  return stats;
}

SweepStats local_cd_solve(CovCache& cache, const RVec& b, const RVec& lambda, double mu,
                          int max_sweeps, double tol) {
  SweepStats total;
  for (int s = 0; s < max_sweeps; ++s) {
    const SweepStats one = local_cd_sweep(cache, b, lambda, mu, 1);
    total.rejected += one.rejected;
    total.max_change = one.max_change;
    ++total.sweeps;
    if (one.max_change < tol) break;
  }
  return total;
}

SweepStats local_detection_solve(CovCache& cache, int max_sweeps, double tol) {
  SweepStats total;
  const auto n = static_cast<std::size_t>(cache.x().size());
  const int block = static_cast<int>(cache.block_len());
  for (int s = 0; s < max_sweeps; ++s) {
    double max_change = 0.0;
    for (std::size_t idx = 0; idx < n; ++idx) {
      const int k = static_cast<int>(idx) / block;
      const int t = static_cast<int>(idx) % block;
      const LeaveOneOut loo = cache.leave_one_out(k, t);
      if (!loo.ok) {
        ++total.rejected;
        continue;
      }
      const double cur = cache.x()(static_cast<Eigen::Index>(idx));
      const double u = box_coordinate_minimizer(loo.xi1, loo.xi2);
      if (!cache.set(k, t, u)) {
        ++total.rejected;
        continue;
      }
      max_change = std::max(max_change, std::abs(u - cur));
    }
    total.max_change = max_change;
    ++total.sweeps;
    if (max_change < tol) break;
  }
  return total;
}

RVec dual_update(const RVec& lambda, const RVec& x, const RVec& b, double mu) {
  return lambda + mu * (x - b);
}

double local_objective(const RVec& x, const ReceivedData& data, int m, const RVec& b,
                       const RVec& lambda, double mu) {
  const RVec diff = x - b;
  return ap_cost(x, data, m) + lambda.dot(diff) + 0.5 * mu * diff.squaredNorm();
}

double augmented_lagrangian(const DistributedState& st, const ReceivedData& data, double rho,
                            double mu) {
  double acc = block_penalty(st.b, data.layout(), rho);
  for (int m = 0; m < data.num_aps; ++m) {
    acc += local_objective(st.x(m), data, m, st.b, st.lambda[static_cast<std::size_t>(m)], mu);
  }
  return acc;
}

DistributedState distributed_init(const ReceivedData& data, const AdmmOptions& opts) {
  const auto n = static_cast<Eigen::Index>(data.layout().size());
  DistributedState st;
  st.b = RVec::Zero(n);
  st.caches.reserve(static_cast<std::size_t>(data.num_aps));
  for (int m = 0; m < data.num_aps; ++m) {
    st.caches.emplace_back(data, m, RVec::Zero(n));
    local_detection_solve(st.caches.back(), opts.init_max_sweeps, opts.init_tol);
    st.caches.back().refresh();
  }
  st.lambda.assign(static_cast<std::size_t>(data.num_aps), RVec::Zero(n));
  return st;
}

namespace {

double consensus_residual(const DistributedState& st) {
  double r = 0.0;
  for (const auto& c : st.caches) r = std::max(r, (c.x() - st.b).cwiseAbs().maxCoeff());
  return r;
}

std::vector<RVec> local_copies(const DistributedState& st) {
  std::vector<RVec> xs;
  xs.reserve(st.caches.size());
  for (const auto& c : st.caches) xs.push_back(c.x());
  return xs;
}

void record(BitLedger& ledger, int iter, Direction dir, int ap, const RVec& payload,
            std::uint64_t raw, std::uint64_t huff) {
  const auto len = static_cast<std::size_t>(payload.size());
  ledger.add({iter, dir, ap, len, raw, huff,
              static_cast<std::size_t>((payload.array() == 0.0).count())});
}

// full-precision link
void record(BitLedger& ledger, int iter, Direction dir, int ap, const RVec& payload) {
  const std::uint64_t bits = kUnquantizedBitsPerScalar * static_cast<std::uint64_t>(payload.size());
  record(ledger, iter, dir, ap, payload, bits, bits);
}

// Runs the AP phase (x-update then dual update) against the broadcast b.
int ap_phase(DistributedState& st, const RVec& b_seen, const AdmmOptions& opts) {
  int rejected = 0;
  for (std::size_t m = 0; m < st.caches.size(); ++m) {
    const SweepStats s =
        local_cd_solve(st.caches[m], b_seen, st.lambda[m], opts.mu, opts.cd_max_sweeps,
                       opts.cd_tol);
    rejected += s.rejected;
    st.caches[m].refresh();
    st.lambda[m] = dual_update(st.lambda[m], st.caches[m].x(), b_seen, opts.mu);
  }
  return rejected;
}

}  // namespace

DistributedResult alg2_solve(const ReceivedData& data, const AdmmOptions& opts,
                             const IterateObserver& observer) {
  opts.validate();
  const BlockLayout lay = data.layout();
  DistributedState st = distributed_init(data, opts);
  DistributedResult res;

  auto push_trace = [&](double change) {
    TraceRow row;
    row.iter = st.iter;
    row.objective = penalized_cost(st.b, data, opts.rho);
    row.change = change;
    row.residual = consensus_residual(st);
    row.lagrangian = augmented_lagrangian(st, data, opts.rho, opts.mu);
    if (!res.trace.empty() && row.lagrangian > res.trace.back().lagrangian) {
      res.lagrangian_monotone = false;
    }
    res.trace.push_back(row);
    if (opts.track_curvature) {
      double lm = 0.0;
      for (int m = 0; m < data.num_aps; ++m) {
        lm = std::max(lm, local_curvature(st.x(m), data, m));
      }
      res.curvature.push_back(lm);
    }
  };
  push_trace(0.0);

  while (st.iter < opts.max_iters) {
    ++st.iter;
    const std::vector<RVec> xs = local_copies(st);
    for (int m = 0; m < data.num_aps; ++m) {
      record(res.ledger, st.iter, Direction::ApToCpu, m, xs[static_cast<std::size_t>(m)]);
    }
    const RVec b_prev = st.b;
    st.b = b_update_admm(b_prev, xs, st.lambda, opts.rho, opts.mu, opts.delta, lay);
    for (int m = 0; m < data.num_aps; ++m) {
      record(res.ledger, st.iter, Direction::CpuToAp, m, st.b);
    }
    res.rejected_moves += ap_phase(st, st.b, opts);

    double x_change = 0.0;
    for (int m = 0; m < data.num_aps; ++m) {
      x_change = std::max(x_change, (st.x(m) - xs[static_cast<std::size_t>(m)]).cwiseAbs().maxCoeff());
    }
    const double b_change = (st.b - b_prev).cwiseAbs().maxCoeff();
    push_trace(b_change);
    if (observer) observer(st);
    if (b_change < opts.tol && x_change < opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.b = st.b;
  res.iterations = st.iter;
  return res;
}

ReceivedData with_target_covariances(const ReceivedData& data, std::vector<CMat> targets) {
  ReceivedData out;
  out.num_aps = data.num_aps;
  out.antennas = data.antennas;
  out.num_devices = data.num_devices;
  out.sig_len = data.sig_len;
  out.max_delay = data.max_delay;
  out.signatures = data.signatures;
  out.pg = data.pg;
  out.noise_var = data.noise_var;
  out.sample_cov = std::move(targets);
  return out;
}

RVec alg3_b_update(const RVec& b, std::span<const RVec> x_received, const ReceivedData& data,
                   const SolveOptions& inner) {
  std::vector<CMat> targets;
  targets.reserve(x_received.size());
  for (int m = 0; m < data.num_aps; ++m) {
    targets.push_back(model_covariance(x_received[static_cast<std::size_t>(m)], data, m));
  }
  const ReceivedData view = with_target_covariances(data, std::move(targets));
  return alg1_solve(view, inner, b).b;
}

DistributedResult alg3_solve(const ReceivedData& data, const Alg3Options& opts) {
  opts.admm.validate();
  const BlockLayout lay = data.layout();
  const auto n = lay.size();
  SolveOptions inner = opts.inner;
  inner.rho = opts.admm.rho;

  std::optional<QuantizerSpec> q;
  if (opts.bits) q = QuantizerSpec::uniform(*opts.bits, 0.0, 1.0);

  // Applies the link quantizer and books the message.
  auto transmit = [&](const RVec& v, int iter, Direction dir, int ap, BitLedger& ledger) {
    if (!q) {
      record(ledger, iter, dir, ap, v);
      return v;
    }
    Quantized out = quantize(v, *q);
    record(ledger, iter, dir, ap, out.recon, static_cast<std::uint64_t>(q->bits) * n,
           huffman_bits(out.symbols));
    return RVec(std::move(out.recon));
  };

  DistributedState st = distributed_init(data, opts.admm);
  DistributedResult res;
  res.trace.push_back({0, penalized_cost(st.b, data, opts.admm.rho), 0.0, 0.0,
                       consensus_residual(st), 0.0});

  while (st.iter < opts.admm.max_iters) {
    ++st.iter;
    std::vector<RVec> received;
    received.reserve(static_cast<std::size_t>(data.num_aps));
    for (int m = 0; m < data.num_aps; ++m) {
      received.push_back(transmit(st.x(m), st.iter, Direction::ApToCpu, m, res.ledger));
    }
    const RVec b_prev = st.b;
    st.b = alg3_b_update(b_prev, received, data, inner);
    const double change = (st.b - b_prev).cwiseAbs().maxCoeff();

    TraceRow row;
    row.iter = st.iter;
    row.objective = penalized_cost(st.b, data, opts.admm.rho);
    row.change = change;
    row.residual = consensus_residual(st);
    res.trace.push_back(row);

    if (change < opts.admm.tol) {
      res.converged = true;
      break;
    }
    // the final b is not broadcast
    if (st.iter == opts.admm.max_iters) break;

    RVec b_seen;
    for (int m = 0; m < data.num_aps; ++m) {
      RVec v = transmit(st.b, st.iter, Direction::CpuToAp, m, res.ledger);
      if (m == 0) b_seen = std::move(v);
    }
    res.rejected_moves += ap_phase(st, b_seen, opts.admm);
  }
  res.b = st.b;
  res.iterations = st.iter;
  return res;
}

}  // namespace asyncact
