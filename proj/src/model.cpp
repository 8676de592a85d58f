#include "asyncact/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace asyncact {

namespace {

CVec complex_gaussian(std::mt19937_64& rng, Eigen::Index n, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = cd(re, im);
  }
  return v;
}

CMat complex_gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                      double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cd(re, im);
    }
  }
  return m;
}

}  // namespace

int SystemConfig::num_active() const {
  return static_cast<int>(std::lround(activity_ratio * num_devices));
}

void SystemConfig::validate() const {
  auto require = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(std::string(field) + ": " + what);
  };
  require(num_aps >= 1, "num_aps", "must be positive");
  require(antennas_per_ap >= 1, "antennas_per_ap", "must be positive");
  require(num_devices >= 1, "num_devices", "must be positive");
  require(sig_len >= 1, "sig_len", "must be positive");
  require(max_delay >= 0, "max_delay", "must be non-negative");
  require(area_side > 0.0, "area_side", "must be positive");
  require(activity_ratio > 0.0 && activity_ratio < 1.0, "activity_ratio", "must lie in (0,1)");
  require(shadow_std_db >= 0.0, "shadow_std_db", "must be non-negative");
  require(power_percentile > 0.0 && power_percentile <= 1.0, "power_percentile",
          "must lie in (0,1]");
}

CVec ReceivedData::effective_signature(int k, int t) const {
  CVec s = CVec::Zero(effective_len());
  s.segment(t, sig_len) = signatures[k];
  return s;
}

CMat ReceivedData::effective_signatures(int k) const {
  CMat S = CMat::Zero(effective_len(), max_delay + 1);
  for (int t = 0; t <= max_delay; ++t) S.col(t).segment(t, sig_len) = signatures[k];
  return S;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  // splitmix64 finalizer over the xor-combined value
  std::uint64_t z = base ^ (counter + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double torus_distance(const Point& p, const Point& q, double side) {
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double d = std::abs(p[i] - q[i]);
    const double w = std::min(d, side - d);
    acc += w * w;
  }
  return std::sqrt(acc);
}

double pathloss_db(const SystemConfig& config, double distance, double shadow_db) {
  return config.pathloss_intercept_db +
         config.pathloss_slope_db_per_decade * std::log10(distance) + shadow_db;
}

RVec assign_powers(const Eigen::MatrixXd& gains, const SystemConfig& config) {
  const Eigen::Index K = gains.rows();
  const double p_max = db_to_linear(config.max_tx_power_dbm);
  const double noise = db_to_linear(config.noise_power_dbm);

  RVec best = gains.rowwise().maxCoeff();
  double target = 0.0;
  if (config.target_snr_db) {
    target = db_to_linear(*config.target_snr_db);
  } else {
    std::vector<double> snr(K);
    for (Eigen::Index k = 0; k < K; ++k) snr[k] = p_max * best(k) / noise;
    std::sort(snr.begin(), snr.end());
    const auto reach = static_cast<Eigen::Index>(
        std::ceil(config.power_percentile * static_cast<double>(K) - 1e-9));
    const Eigen::Index idx = std::clamp<Eigen::Index>(K - reach, 0, K - 1);
    target = snr[idx];
  }

  RVec p(K);
  for (Eigen::Index k = 0; k < K; ++k) p(k) = std::min(p_max, target * noise / best(k));
  return p;
}

Scenario generate_scenario(const SystemConfig& config, std::uint64_t trial_seed) {
  std::mt19937_64 rng(derive_seed(config.rng_seed ^ trial_seed, 1));
  const int M = config.num_aps;
  const int K = config.num_devices;
  const int L = config.sig_len;
  const int T = config.max_delay;

  Scenario sc;
  sc.max_delay = T;
  std::uniform_real_distribution<double> coord(0.0, config.area_side);
  sc.ap_positions.resize(M);
  for (auto& p : sc.ap_positions) p = {coord(rng), coord(rng)};
  sc.device_positions.resize(K);
  for (auto& p : sc.device_positions) p = {coord(rng), coord(rng)};

  std::normal_distribution<double> shadow(0.0, config.shadow_std_db);
  sc.gains.resize(K, M);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      const double d = torus_distance(sc.device_positions[k], sc.ap_positions[m],
                                      config.area_side);
      const double psi = config.shadow_std_db > 0.0 ? shadow(rng) : 0.0;
      // Co-located points would give an infinite gain; 1 m floor.
      sc.gains(k, m) = db_to_linear(pathloss_db(config, std::max(d, 1.0), psi));
    }
  }

  sc.signatures.reserve(K);
  for (int k = 0; k < K; ++k) sc.signatures.push_back(complex_gaussian(rng, L, 1.0));

  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  const int n_active = std::clamp(config.num_active(), 0, K);
  for (int i = 0; i < n_active; ++i) {
    std::uniform_int_distribution<int> pick(i, K - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  sc.active.assign(K, 0);
  sc.delays.assign(K, 0);
  std::uniform_int_distribution<int> delay(0, T);
  for (int i = 0; i < n_active; ++i) sc.active[order[i]] = 1;
  for (int k = 0; k < K; ++k) {
    if (sc.active[k]) sc.delays[k] = delay(rng);
  }

  sc.powers = assign_powers(sc.gains, config);
  sc.noise_var = RVec::Constant(M, db_to_linear(config.noise_power_dbm));
  return sc;
}

std::vector<int> true_indicator(const Scenario& scenario) {
  const std::size_t len = static_cast<std::size_t>(scenario.max_delay + 1);
  std::vector<int> b(scenario.active.size() * len, 0);
  for (std::size_t k = 0; k < scenario.active.size(); ++k) {
    if (scenario.active[k]) b[k * len + static_cast<std::size_t>(scenario.delays[k])] = 1;
  }
  return b;
}

void refresh_sample_cov(ReceivedData& data) {
  data.sample_cov.resize(data.Y.size());
  for (std::size_t m = 0; m < data.Y.size(); ++m) {
    const CMat& Y = data.Y[m];
    CMat R = Y * Y.adjoint() / static_cast<double>(Y.cols());
    // exact Hermitian symmetry
    data.sample_cov[m] = (R + R.adjoint()) * 0.5;
  }
}

ReceivedData assemble_received(const Scenario& scenario, const SystemConfig& config,
                               const std::vector<std::vector<CVec>>& channels,
                               const std::vector<CMat>& noise) {
  ReceivedData data;
  data.num_aps = config.num_aps;
  data.antennas = config.antennas_per_ap;
  data.num_devices = config.num_devices;
  data.sig_len = config.sig_len;
  data.max_delay = config.max_delay;
  data.signatures = scenario.signatures;
  data.noise_var = scenario.noise_var;
  data.pg.resize(data.num_devices, data.num_aps);
  for (int k = 0; k < data.num_devices; ++k) {
    for (int m = 0; m < data.num_aps; ++m) {
      data.pg(k, m) = scenario.powers(k) * scenario.gains(k, m);
    }
  }

  const int LT = data.effective_len();
  data.Y.assign(data.num_aps, CMat::Zero(LT, data.antennas));
  for (int m = 0; m < data.num_aps; ++m) {
    CMat& Y = data.Y[m];
    for (int k = 0; k < data.num_devices; ++k) {
      if (!scenario.active[k]) continue;
      const CVec s = data.effective_signature(k, scenario.delays[k]);
      Y.noalias() += std::sqrt(data.pg(k, m)) * s * channels[k][m].transpose();
    }
    if (!noise.empty()) Y += noise[m];
  }
  refresh_sample_cov(data);
  return data;
}

ReceivedData synthesize_received(const Scenario& scenario, const SystemConfig& config,
                                 std::uint64_t trial_seed) {
  std::mt19937_64 rng(derive_seed(config.rng_seed ^ trial_seed, 2));
  const int M = config.num_aps;
  const int K = config.num_devices;
  const int N = config.antennas_per_ap;

  std::vector<std::vector<CVec>> channels(K);
  for (int k = 0; k < K; ++k) {
    channels[k].reserve(M);
    for (int m = 0; m < M; ++m) channels[k].push_back(complex_gaussian(rng, N, 1.0));
  }
  std::vector<CMat> noise;
  noise.reserve(M);
  for (int m = 0; m < M; ++m) {
    noise.push_back(complex_gaussian(rng, config.effective_len(), N, scenario.noise_var(m)));
  }
  return assemble_received(scenario, config, channels, noise);
}

}  // namespace asyncact
