#pragma once

#include <utility>

#include "asyncact/model.hpp"
#include "asyncact/types.hpp"

namespace asyncact {

/// C_m(b) = sum_{k,t} b_{k,t} p_k g_{k,m} s_{k,t} s_{k,t}^H + sigma_m^2 I.
CMat model_covariance(const RVec& b, const ReceivedData& data, int m);

/// Re(s_{k,t}^H X s_{k,t}) using only the L x L block that s_{k,t} touches.
double quad_form(const CMat& X, const CVec& signature, int delay);

/// log det C + tr(C^-1 R) for one AP; R is data.sample_cov[m].
double ap_cost(const RVec& b, const ReceivedData& data, int m);

/// Negative log-likelihood summed over APs (no penalty).
double nll_cost(const RVec& b, const ReceivedData& data);

/// Gradient of ap_cost with respect to every coordinate (no penalty term).
RVec ap_gradient(const RVec& b, const ReceivedData& data, int m);

/// Gradient of nll_cost(b) + rho * sum(b).
RVec nll_gradient(const RVec& b, const ReceivedData& data, double rho);

/// rho * sum_k (sum_t b_{k,t} - max_t b_{k,t}).
double block_penalty(const RVec& b, const BlockLayout& layout, double rho);

double penalized_cost(const RVec& b, const ReceivedData& data, double rho);

/// (A + c s s^H)^{-1} from A^{-1}. Throws NumericalError when 1 + c s^H A^{-1} s
/// is not above the PD tolerance.
CMat sherman_morrison_update(const CMat& inv, const CVec& s, double c,
                             double tolerance = kNumerics.pd_tolerance);

/// Exact Hessian of ap_cost; used to estimate the local curvature L_m.
Eigen::MatrixXd ap_hessian(const RVec& b, const ReceivedData& data, int m);

/// Spectral norm of ap_hessian at b.
double local_curvature(const RVec& b, const ReceivedData& data, int m);

/// Scalars of the one-coordinate restriction f(u) = log(1+xi1 u) - xi2 u/(1+xi1 u).
struct LeaveOneOut {
  double xi1 = 0.0;
  double xi2 = 0.0;
  bool ok = false;  // false when the leave-one-out covariance is not PD
};

/// Per-AP covariance C_m(x) with an explicit inverse maintained by rank-1
/// updates as single coordinates of x change. A full refactorization runs
/// every `refresh_period` updates.
class CovCache {
 public:
  CovCache(const ReceivedData& data, int m, RVec x,
           const NumericsConfig& numerics = kNumerics);

  const RVec& x() const { return x_; }
  const CMat& covariance() const { return cov_; }
  const CMat& inverse() const { return inv_; }
  int ap() const { return m_; }
  std::size_t block_len() const { return data_->layout().block_len; }

  /// xi1/xi2 of coordinate (k,t) against the covariance with that coordinate
  /// removed, evaluated with `target` in place of the sample covariance.
  LeaveOneOut leave_one_out(int k, int t, const CMat& target) const;
  LeaveOneOut leave_one_out(int k, int t) const;

  /// Scalars of the step d away from the current x_{k,t}, i.e. against the
  /// current covariance. Always ok since that covariance is PD.
  LeaveOneOut increment(int k, int t) const;

  /// Sets x_{k,t} = value. Returns false (and leaves the cache untouched) when
  /// the updated covariance would not be PD.
  bool set(int k, int t, double value);

  /// Rebuilds covariance and inverse from x.
  void refresh();

  int updates_since_refresh() const { return pending_; }

 private:
  const ReceivedData* data_;
  int m_;
  RVec x_;
  CMat cov_;
  CMat inv_;
  NumericsConfig numerics_;
  int pending_ = 0;
};

}  // namespace asyncact
