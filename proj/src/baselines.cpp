#include "asyncact/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace asyncact {

double Scalar1DProblem::value(double u) const {
  double acc = 0.0;
  for (const auto& [xi1, xi2] : coeffs) {
    const double w = 1.0 + xi1 * u;
    acc += std::log(w) - xi2 * u / w;
  }
  return acc;
}

double minimize_1d_multiap(const Scalar1DProblem& prob) {
  constexpr int kGrid = 32;
  std::vector<double> cands;
  cands.reserve(kGrid + 3 + prob.coeffs.size());
  for (int i = 0; i <= kGrid; ++i) cands.push_back(static_cast<double>(i) / kGrid);
  for (const auto& [xi1, xi2] : prob.coeffs) {
    if (xi1 > 0.0) cands.push_back(std::clamp((xi2 - xi1) / (xi1 * xi1), 0.0, 1.0));
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double v = prob.value(cands[i]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = cands[best > 0 ? best - 1 : 0];
  const double hi = cands[std::min(best + 1, cands.size() - 1)];
  if (hi > lo) {
    const auto [u, v] = boost::math::tools::brent_find_minima(
        [&](double x) { return prob.value(x); }, lo, hi, 52);
    if (v < best_val) return u;
  }
  return cands[best];
}

namespace {

std::vector<CovCache> build_caches(const ReceivedData& data, const RVec& b) {
  std::vector<CovCache> caches;
  caches.reserve(static_cast<std::size_t>(data.num_aps));
  for (int m = 0; m < data.num_aps; ++m) caches.emplace_back(data, m, b);
  return caches;
}

// Collects (xi1, xi2) of coordinate (k,t) across APs; false if any AP's
// leave-one-out covariance is not PD.
bool gather(const std::vector<CovCache>& caches, int k, int t, Scalar1DProblem& prob) {
  prob.coeffs.clear();
  for (const auto& c : caches) {
    const LeaveOneOut loo = c.leave_one_out(k, t);
    if (!loo.ok) return false;
    prob.coeffs.emplace_back(loo.xi1, loo.xi2);
  }
  return true;
}

bool set_all(std::vector<CovCache>& caches, int k, int t, double value) {
  const auto idx = static_cast<Eigen::Index>(static_cast<std::size_t>(k) *
                                                 caches.front().block_len() +
                                             static_cast<std::size_t>(t));
  const double old = caches.front().x()(idx);
  for (std::size_t m = 0; m < caches.size(); ++m) {
    if (!caches[m].set(k, t, value)) {
      for (std::size_t r = 0; r < m; ++r) {
        caches[r].set(k, t, old);
        caches[r].refresh();
      }
      return false;
    }
  }
  return true;
}

}  // namespace

BaselineResult cde_solve(const ReceivedData& data, const BaselineOptions& opts) {
  const BlockLayout lay = data.layout();
  RVec b = RVec::Zero(static_cast<Eigen::Index>(lay.size()));
  auto caches = build_caches(data, b);
  BaselineResult res;
  res.objective.push_back(nll_cost(b, data));

  Scalar1DProblem prob;
  for (int s = 0; s < opts.max_sweeps; ++s) {
    double max_change = 0.0;
    for (int k = 0; k < data.num_devices; ++k) {
      for (int t = 0; t <= data.max_delay; ++t) {
        if (!gather(caches, k, t, prob)) continue;
        const auto i = static_cast<Eigen::Index>(lay.index(k, t));
        const double u = minimize_1d_multiap(prob);
        if (prob.value(u) > prob.value(b(i))) continue;
        if (!set_all(caches, k, t, u)) continue;
        max_change = std::max(max_change, std::abs(u - b(i)));
        b(i) = u;
      }
    }
    ++res.sweeps;
    res.objective.push_back(nll_cost(b, data));
    if (max_change < opts.tol) break;
  }

  // one delay per device: keep the largest entry
  const auto len = static_cast<Eigen::Index>(lay.block_len);
  for (std::size_t k = 0; k < lay.num_devices; ++k) {
    auto blk = b.segment(static_cast<Eigen::Index>(lay.index(k, 0)), len);
    Eigen::Index top = 0;
    const double v = blk.maxCoeff(&top);
    blk.setZero();
    blk(top) = v;
  }
  res.b = std::move(b);
  return res;
}

BaselineResult bcd_solve(const ReceivedData& data, const BaselineOptions& opts) {
  const BlockLayout lay = data.layout();
  RVec b = RVec::Zero(static_cast<Eigen::Index>(lay.size()));
  auto caches = build_caches(data, b);
  BaselineResult res;
  res.objective.push_back(nll_cost(b, data));

  Scalar1DProblem prob;
  const int len = data.max_delay + 1;
  for (int s = 0; s < opts.max_sweeps; ++s) {
    double max_change = 0.0;
    for (int k = 0; k < data.num_devices; ++k) {
      const auto off = static_cast<Eigen::Index>(lay.index(k, 0));
      const RVec old = b.segment(off, len);
      bool ok = true;
      for (int t = 0; t < len && ok; ++t) {
        if (old(t) != 0.0) ok = set_all(caches, k, t, 0.0);
      }
      if (!ok) {
        // the block keeps its old value
        caches = build_caches(data, b);
        continue;
      }

      // candidate costs relative to the all-zero block
      double best_val = 0.0;
      int best_t = -1;
      double best_u = 0.0;
      for (int t = 0; t < len; ++t) {
        if (!gather(caches, k, t, prob)) continue;
        const double u = minimize_1d_multiap(prob);
        const double v = prob.value(u);
        if (v < best_val) {
          best_val = v;
          best_t = t;
          best_u = u;
        }
      }
      RVec fresh = RVec::Zero(len);
      if (best_t >= 0 && set_all(caches, k, best_t, best_u)) fresh(best_t) = best_u;
      b.segment(off, len) = fresh;
      max_change = std::max(max_change, (fresh - old).cwiseAbs().maxCoeff());
      res.objective.push_back(nll_cost(b, data));
    }
    ++res.sweeps;
    if (max_change < opts.tol) break;
  }
  res.b = std::move(b);
  return res;
}

}  // namespace asyncact
