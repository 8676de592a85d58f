#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "asyncact/types.hpp"

namespace asyncact {

struct SystemConfig {
  int num_aps = 8;
  int antennas_per_ap = 8;
  int num_devices = 100;
  int sig_len = 9;
  int max_delay = 1;
  double area_side = 1000.0;
  double activity_ratio = 0.1;
  double noise_power_dbm = -104.0;
  double max_tx_power_dbm = 23.0;
  double pathloss_intercept_db = -30.5;
  double pathloss_slope_db_per_decade = -36.7;
  double shadow_std_db = 2.0;
  double power_percentile = 0.95;
  // When set, every device targets this SNR at its dominant AP (capped by the
  // power budget) instead of the percentile rule.
  std::optional<double> target_snr_db;
  std::uint64_t rng_seed = 1;

  int effective_len() const { return sig_len + max_delay; }
  BlockLayout layout() const {
    return {static_cast<std::size_t>(num_devices), static_cast<std::size_t>(max_delay + 1)};
  }
  int num_active() const;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

using Point = std::array<double, 2>;

struct Scenario {
  std::vector<Point> ap_positions;
  std::vector<Point> device_positions;
  Eigen::MatrixXd gains;  // K x M, linear
  RVec powers;            // mW
  RVec noise_var;         // per AP, mW
  std::vector<CVec> signatures;
  std::vector<int> active;  // 0/1 per device
  std::vector<int> delays;  // valid only where active
  int max_delay = 0;
};

struct ReceivedData {
  int num_aps = 0;
  int antennas = 0;
  int num_devices = 0;
  int sig_len = 0;
  int max_delay = 0;

  std::vector<CMat> Y;           // (L+T) x N per AP
  std::vector<CMat> sample_cov;  // Y Y^H / N per AP
  std::vector<CVec> signatures;  // length L
  Eigen::MatrixXd pg;            // p_k g_{k,m}, K x M
  RVec noise_var;

  int effective_len() const { return sig_len + max_delay; }
  BlockLayout layout() const {
    return {static_cast<std::size_t>(num_devices), static_cast<std::size_t>(max_delay + 1)};
  }
  /// Delay-shifted signature s_{k,t} of length L+T.
  CVec effective_signature(int k, int t) const;
  /// (L+T) x (T+1) matrix whose column t is s_{k,t}.
  CMat effective_signatures(int k) const;
};

/// 64-bit seed derived from a base seed and a counter; stable across runs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter);

double torus_distance(const Point& p, const Point& q, double side);

/// Large-scale gain in dB at the given distance and shadowing sample.
double pathloss_db(const SystemConfig& config, double distance, double shadow_db);

RVec assign_powers(const Eigen::MatrixXd& gains, const SystemConfig& config);

Scenario generate_scenario(const SystemConfig& config, std::uint64_t trial_seed);

std::vector<int> true_indicator(const Scenario& scenario);

/// Fills Y, sample covariances and side information. Channel and noise draws
/// come from a stream independent of the scenario stream.
ReceivedData synthesize_received(const Scenario& scenario, const SystemConfig& config,
                                 std::uint64_t trial_seed);

/// Same as synthesize_received but with caller-supplied small-scale channels
/// h[k][m] (length N) and noise matrices; used for noiseless constructions.
ReceivedData assemble_received(const Scenario& scenario, const SystemConfig& config,
                               const std::vector<std::vector<CVec>>& channels,
                               const std::vector<CMat>& noise);

/// Recomputes sample_cov from Y.
void refresh_sample_cov(ReceivedData& data);

}  // namespace asyncact
