#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asyncact/baselines.hpp"
#include "asyncact/fronthaul.hpp"
#include "asyncact/model.hpp"
#include "asyncact/solver_centralized.hpp"
#include "asyncact/solver_distributed.hpp"

namespace asyncact {

/// Integer tallies behind PM/PF at one threshold; merging is plain addition.
struct DetectionCounts {
  std::int64_t active = 0;
  std::int64_t inactive = 0;
  std::int64_t missed = 0;       // active, not detected at exactly its true delay
  std::int64_t false_alarm = 0;  // inactive, something detected

  DetectionCounts& operator+=(const DetectionCounts& o);
  double pm() const;  // NaN when there are no active devices
  double pf() const;  // NaN when there are no inactive devices
};

struct DetectionMetrics {
  double pm = 0.0;
  double pf = 0.0;
};

/// One device is detected at the first argmax of its block when that entry
/// exceeds gamma.
DetectionCounts detection_counts(const RVec& soft, std::span<const int> truth,
                                 std::size_t block_len, double gamma);

DetectionMetrics detection_metrics(const RVec& soft, std::span<const int> truth,
                                   std::size_t block_len, double gamma);

struct RocPoint {
  double gamma = 0.0;
  double pm = 0.0;
  double pf = 0.0;
};

std::vector<RocPoint> roc_sweep(const RVec& soft, std::span<const int> truth,
                                std::size_t block_len, std::span<const double> grid);

/// A detector output paired with the ground truth it should recover.
struct SoftSample {
  RVec soft;
  std::vector<int> truth;
  std::size_t block_len = 1;
};

DetectionCounts pooled_counts(std::span<const SoftSample> samples, double gamma);

std::vector<RocPoint> pooled_roc(std::span<const SoftSample> samples,
                                 std::span<const double> grid);

/// n uniform points on [0,1].
std::vector<double> uniform_grid(int n = 101);

struct EqualError {
  double gamma = 0.0;
  double p_err = 0.0;
  double pm = 0.0;
  double pf = 0.0;
  bool degenerate = false;  // PF - PM never changes sign on [0,1]
};

/// PF = PM point of the pooled curves: grid scan, then bisection on the
/// bracketing interval down to `tol`. Without a strict sign change, the grid
/// point minimizing |PF - PM| is returned (the middle one among ties).
EqualError equal_error_rate(std::span<const SoftSample> samples, int grid_points = 101,
                            double tol = 1e-4);

enum class Algorithm { Alg1, Alg2, Alg3, Cde, Bcd };

std::string to_string(Algorithm a);
/// "alg1" | "alg2" | "alg3" | "cde" | "bcd"; throws ConfigError otherwise.
Algorithm parse_algorithm(const std::string& name);

struct AlgorithmSpec {
  Algorithm id = Algorithm::Alg1;
  std::string label;  // report name; defaults to to_string(id)
  SolveOptions alg1;
  AdmmOptions admm;
  int alg3_iters = 3;
  SolveOptions alg3_inner{.max_iters = 50};
  BaselineOptions baseline;
  // alg1: bits per uploaded scalar; alg3: bits per b/x entry. nullopt = ideal links.
  std::optional<int> bits;

  std::string name() const { return label.empty() ? to_string(id) : label; }
};

struct TrialResult {
  std::uint64_t trial = 0;
  RVec soft;
  std::vector<int> truth;
  std::size_t block_len = 1;
  int iterations = 0;
  double wall_ms = 0.0;
  double penalized_cost = 0.0;  // of the output, on the true data
  BitLedger ledger;
  std::vector<TraceRow> trace;
  bool failed = false;
  std::string error;
};

/// Runs one algorithm on one received block.
TrialResult run_algorithm(const ReceivedData& data, const std::vector<int>& truth,
                          const AlgorithmSpec& spec);

struct DetectionReport {
  std::string algorithm;
  std::vector<RocPoint> roc;  // pooled
  EqualError equal_error;
  std::vector<TrialResult> trials;  // trial order; failed trials included
  int failures = 0;
  double mean_iters = 0.0;
  double mean_raw_bits = 0.0;      // per trial
  double mean_huffman_bits = 0.0;  // per trial
  double mean_wall_ms = 0.0;
};

struct MonteCarloOptions {
  int trials = 1;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  int grid_points = 101;
};

/// Seed of trial i; every worker count sees the same stream.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Per trial: scenario, received data, every algorithm on the same data.
/// Failed solver runs are recorded and excluded from the pooled metrics.
std::vector<DetectionReport> run_monte_carlo(const SystemConfig& config,
                                             const std::vector<AlgorithmSpec>& algorithms,
                                             const MonteCarloOptions& opts);

/// Pooled metrics and summary statistics from finished trials.
DetectionReport summarize(const std::string& algorithm, std::vector<TrialResult> trials,
                          int grid_points = 101);

}  // namespace asyncact
