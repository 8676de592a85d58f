#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace asyncact {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Thrown when a covariance that must be positive definite fails to factor.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for invalid configurations or arguments.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tolerances shared across the numerical modules.
struct NumericsConfig {
  double pd_tolerance = 1e-12;
  int refresh_period = 200;
  double fd_step = 1e-5;
};

inline constexpr NumericsConfig kNumerics{};

/// Index helpers for the K blocks of length T+1 of an activity vector.
struct BlockLayout {
  std::size_t num_devices = 0;
  std::size_t block_len = 1;  // T + 1

  std::size_t size() const { return num_devices * block_len; }
  std::size_t index(std::size_t k, std::size_t t) const { return k * block_len + t; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace asyncact
