#include "asyncact/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace asyncact {

namespace {

Eigen::LLT<CMat> factor(const CMat& C) {
  Eigen::LLT<CMat> llt(C);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance is not positive definite");
  }
  return llt;
}

double log_det(const Eigen::LLT<CMat>& llt) {
  const auto& L = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) acc += std::log(L(i, i).real());
  return 2.0 * acc;
}

CMat hermitian_inverse(const Eigen::LLT<CMat>& llt, Eigen::Index n) {
  CMat inv = llt.solve(CMat::Identity(n, n));
  return (inv + inv.adjoint()) * 0.5;
}

}  // namespace

CMat model_covariance(const RVec& b, const ReceivedData& data, int m) {
  const int LT = data.effective_len();
  const int L = data.sig_len;
  const BlockLayout lay = data.layout();
  CMat C = CMat::Zero(LT, LT);
  for (int k = 0; k < data.num_devices; ++k) {
    const CVec& s = data.signatures[k];
    for (int t = 0; t <= data.max_delay; ++t) {
      const double w = b(lay.index(k, t)) * data.pg(k, m);
      if (w == 0.0) continue;
      C.block(t, t, L, L).noalias() += w * s * s.adjoint();
    }
  }
  C.diagonal().array() += data.noise_var(m);
  return C;
}

double quad_form(const CMat& X, const CVec& signature, int delay) {
  const Eigen::Index L = signature.size();
  return signature.dot(X.block(delay, delay, L, L) * signature).real();
}

double ap_cost(const RVec& b, const ReceivedData& data, int m) {
  const CMat C = model_covariance(b, data, m);
  const auto llt = factor(C);
  const CMat sol = llt.solve(data.sample_cov[m]);
  return log_det(llt) + sol.trace().real();
}

double nll_cost(const RVec& b, const ReceivedData& data) {
  double acc = 0.0;
  for (int m = 0; m < data.num_aps; ++m) acc += ap_cost(b, data, m);
  return acc;
}

RVec ap_gradient(const RVec& b, const ReceivedData& data, int m) {
  const BlockLayout lay = data.layout();
  const CMat C = model_covariance(b, data, m);
  const auto llt = factor(C);
  const CMat inv = hermitian_inverse(llt, C.rows());
  const CMat A = inv * data.sample_cov[m] * inv;
  RVec g(lay.size());
  for (int k = 0; k < data.num_devices; ++k) {
    const CVec& s = data.signatures[k];
    for (int t = 0; t <= data.max_delay; ++t) {
      g(lay.index(k, t)) = data.pg(k, m) * (quad_form(inv, s, t) - quad_form(A, s, t));
    }
  }
  return g;
}

RVec nll_gradient(const RVec& b, const ReceivedData& data, double rho) {
  RVec d = RVec::Constant(data.layout().size(), rho);
  for (int m = 0; m < data.num_aps; ++m) d += ap_gradient(b, data, m);
  return d;
}

double block_penalty(const RVec& b, const BlockLayout& layout, double rho) {
  double acc = 0.0;
  for (std::size_t k = 0; k < layout.num_devices; ++k) {
    const auto blk = b.segment(static_cast<Eigen::Index>(layout.index(k, 0)),
                               static_cast<Eigen::Index>(layout.block_len));
    acc += blk.sum() - blk.maxCoeff();
  }
  return rho * acc;
}

double penalized_cost(const RVec& b, const ReceivedData& data, double rho) {
  return nll_cost(b, data) + block_penalty(b, data.layout(), rho);
}

CMat sherman_morrison_update(const CMat& inv, const CVec& s, double c, double tolerance) {
  if (c == 0.0) return inv;
  const CVec w = inv * s;
  const double denom = 1.0 + c * s.dot(w).real();
  if (denom <= tolerance) throw NumericalError("singular rank-1 update");
  CMat out = inv - (c / denom) * w * w.adjoint();
  return (out + out.adjoint()) * 0.5;
}

Eigen::MatrixXd ap_hessian(const RVec& b, const ReceivedData& data, int m) {
  const BlockLayout lay = data.layout();
  const CMat C = model_covariance(b, data, m);
  const auto llt = factor(C);
  const CMat inv = hermitian_inverse(llt, C.rows());
  const CMat A = inv * data.sample_cov[m] * inv;

  const auto n = static_cast<Eigen::Index>(lay.size());
  const int LT = data.effective_len();
  CMat S(LT, n);
  for (int k = 0; k < data.num_devices; ++k) {
    for (int t = 0; t <= data.max_delay; ++t) {
      S.col(static_cast<Eigen::Index>(lay.index(k, t))) =
          std::sqrt(data.pg(k, m)) * data.effective_signature(k, t);
    }
  }
  // d^2/dx_i dx_j [log det C + tr(C^-1 R)]
  //   = -|s_i^H C^-1 s_j|^2 + 2 Re(s_i^H C^-1 s_j s_j^H A s_i)
  const CMat P = S.adjoint() * inv * S;
  const CMat Q = S.adjoint() * A * S;
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      H(i, j) = -std::norm(P(i, j)) + 2.0 * (P(i, j) * Q(j, i)).real();
    }
  }
  return (H + H.transpose()) * 0.5;
}

double local_curvature(const RVec& b, const ReceivedData& data, int m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ap_hessian(b, data, m),
                                                          Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CovCache::CovCache(const ReceivedData& data, int m, RVec x, const NumericsConfig& numerics)
    : data_(&data), m_(m), x_(std::move(x)), numerics_(numerics) {
  refresh();
}

void CovCache::refresh() {
  cov_ = model_covariance(x_, *data_, m_);
  const auto llt = factor(cov_);
  inv_ = hermitian_inverse(llt, cov_.rows());
  pending_ = 0;
}

LeaveOneOut CovCache::leave_one_out(int k, int t) const {
  return leave_one_out(k, t, data_->sample_cov[m_]);
}

LeaveOneOut CovCache::leave_one_out(int k, int t, const CMat& target) const {
  const ReceivedData& d = *data_;
  const int L = d.sig_len;
  const CVec& s = d.signatures[k];
  const double pg = d.pg(k, m_);
  const double c = pg * x_(d.layout().index(k, t));

  // w = C^-1 s_{k,t}; only columns t..t+L-1 of C^-1 are touched.
  const CVec w = inv_.middleCols(t, L) * s;
  const double q = s.dot(w.segment(t, L)).real();
  const double r = w.dot(target * w).real();
  const double denom = 1.0 - c * q;
  LeaveOneOut out;
  if (denom <= numerics_.pd_tolerance) return out;
  out.xi1 = pg * q / denom;
  out.xi2 = pg * r / (denom * denom);
  out.ok = true;
  return out;
}

LeaveOneOut CovCache::increment(int k, int t) const {
  const ReceivedData& d = *data_;
  const int L = d.sig_len;
  const CVec& s = d.signatures[k];
  const double pg = d.pg(k, m_);
  const CVec w = inv_.middleCols(t, L) * s;
  LeaveOneOut out;
  out.xi1 = pg * s.dot(w.segment(t, L)).real();
  out.xi2 = pg * w.dot(d.sample_cov[m_] * w).real();
  out.ok = true;
  return out;
}

bool CovCache::set(int k, int t, double value) {
  const ReceivedData& d = *data_;
  const std::size_t idx = d.layout().index(k, t);
  const double delta = value - x_(idx);
  if (delta == 0.0) return true;
  const int L = d.sig_len;
  const CVec& s = d.signatures[k];
  const double c = delta * d.pg(k, m_);

  const CVec w = inv_.middleCols(t, L) * s;
  const double denom = 1.0 + c * s.dot(w.segment(t, L)).real();
  if (denom <= numerics_.pd_tolerance) return false;

  inv_.noalias() -= (c / denom) * w * w.adjoint();
  cov_.block(t, t, L, L).noalias() += c * s * s.adjoint();
  x_(idx) = value;
  if (++pending_ >= numerics_.refresh_period) refresh();
  return true;
}

}  // namespace asyncact
