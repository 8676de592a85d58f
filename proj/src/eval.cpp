#include "asyncact/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace asyncact {

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  active += o.active;
  inactive += o.inactive;
  missed += o.missed;
  false_alarm += o.false_alarm;
  return *this;
}

double DetectionCounts::pm() const {
  if (active == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(missed) / static_cast<double>(active);
}

double DetectionCounts::pf() const {
  if (inactive == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(false_alarm) / static_cast<double>(inactive);
}

DetectionCounts detection_counts(const RVec& soft, std::span<const int> truth,
                                 std::size_t block_len, double gamma) {
  if (block_len == 0 || static_cast<std::size_t>(soft.size()) != truth.size() ||
      truth.size() % block_len != 0) {
    throw ConfigError("detection_counts: soft/truth sizes do not match the block layout");
  }
  DetectionCounts c;
  const std::size_t K = truth.size() / block_len;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t off = k * block_len;
    int true_t = -1;
    for (std::size_t t = 0; t < block_len; ++t) {
      if (truth[off + t] != 0) true_t = static_cast<int>(t);
    }
    // first maximizer
    std::size_t top = 0;
    for (std::size_t t = 1; t < block_len; ++t) {
      if (soft(static_cast<Eigen::Index>(off + t)) > soft(static_cast<Eigen::Index>(off + top)))
        top = t;
    }
    const bool detected = soft(static_cast<Eigen::Index>(off + top)) > gamma;
    if (true_t >= 0) {
      ++c.active;
      if (!detected || static_cast<int>(top) != true_t) ++c.missed;
    } else {
      ++c.inactive;
      if (detected) ++c.false_alarm;
    }
  }
  return c;
}

DetectionMetrics detection_metrics(const RVec& soft, std::span<const int> truth,
                                   std::size_t block_len, double gamma) {
  const DetectionCounts c = detection_counts(soft, truth, block_len, gamma);
  return {c.pm(), c.pf()};
}

std::vector<RocPoint> roc_sweep(const RVec& soft, std::span<const int> truth,
                                std::size_t block_len, std::span<const double> grid) {
  std::vector<RocPoint> out;
  out.reserve(grid.size());
  for (double g : grid) {
    const DetectionMetrics d = detection_metrics(soft, truth, block_len, g);
    out.push_back({g, d.pm, d.pf});
  }
  return out;
}

DetectionCounts pooled_counts(std::span<const SoftSample> samples, double gamma) {
  DetectionCounts c;
  for (const auto& s : samples) c += detection_counts(s.soft, s.truth, s.block_len, gamma);
  return c;
}

std::vector<RocPoint> pooled_roc(std::span<const SoftSample> samples,
                                 std::span<const double> grid) {
  std::vector<RocPoint> out;
  out.reserve(grid.size());
  for (double g : grid) {
    const DetectionCounts c = pooled_counts(samples, g);
    out.push_back({g, c.pm(), c.pf()});
  }
  return out;
}

std::vector<double> uniform_grid(int n) {
  if (n < 2) throw ConfigError("uniform_grid: need at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  g.back() = 1.0;
  return g;
}

EqualError equal_error_rate(std::span<const SoftSample> samples, int grid_points, double tol) {
  const std::vector<double> grid = uniform_grid(grid_points);
  auto eval_at = [&](double g) {
    const DetectionCounts c = pooled_counts(samples, g);
    return std::pair{c.pm(), c.pf()};
  };

  std::vector<double> diff(grid.size());
  std::vector<std::pair<double, double>> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = eval_at(grid[i]);
    diff[i] = vals[i].second - vals[i].first;
  }
  for (double d : diff) {
    if (std::isnan(d)) throw ConfigError("equal_error_rate: PM or PF undefined on pooled data");
  }

  // PF - PM is non-increasing; bracket its sign change
  std::optional<std::size_t> last_pos, first_neg;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (diff[i] > 0.0) last_pos = i;
    if (diff[i] < 0.0 && !first_neg) first_neg = i;
  }
  EqualError out;
  if (last_pos && first_neg && *last_pos < *first_neg) {
    double lo = grid[*last_pos];
    double hi = grid[*first_neg];
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      const auto [pm, pf] = eval_at(mid);
      if (pf - pm > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.gamma = 0.5 * (lo + hi);
    std::tie(out.pm, out.pf) = eval_at(out.gamma);
    out.p_err = 0.5 * (out.pm + out.pf);
    return out;
  }

  double best = std::numeric_limits<double>::infinity();
  for (double d : diff) best = std::min(best, std::abs(d));
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(diff[i]) == best) ties.push_back(i);
  }
  const std::size_t pick = ties[ties.size() / 2];
  out.gamma = grid[pick];
  out.pm = vals[pick].first;
  out.pf = vals[pick].second;
  out.p_err = 0.5 * (out.pm + out.pf);
  out.degenerate = true;
  return out;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Alg1:
      return "alg1";
    case Algorithm::Alg2:
      return "alg2";
    case Algorithm::Alg3:
      return "alg3";
    case Algorithm::Cde:
      return "cde";
    case Algorithm::Bcd:
      return "bcd";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a :
       {Algorithm::Alg1, Algorithm::Alg2, Algorithm::Alg3, Algorithm::Cde, Algorithm::Bcd}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + name + "' (expected alg1|alg2|alg3|cde|bcd)");
}

namespace {

// Full-precision upload of what the centralized CPU needs.
void book_unquantized_upload(const ReceivedData& data, BitLedger& ledger) {
  const int LT = data.effective_len();
  const auto n = static_cast<std::size_t>(LT <= 2 * data.antennas ? LT * LT
                                                                   : 2 * LT * data.antennas);
  for (int m = 0; m < data.num_aps; ++m) {
    MessageRecord rec;
    rec.ap = m;
    rec.payload_len = n;
    rec.raw_bits = kUnquantizedBitsPerScalar * n;
    rec.huffman_bits = rec.raw_bits;
    ledger.add(rec);
  }
}

std::vector<TraceRow> objective_trace(const std::vector<double>& objective) {
  std::vector<TraceRow> rows;
  rows.reserve(objective.size());
  for (std::size_t i = 0; i < objective.size(); ++i) {
    TraceRow r;
    r.iter = static_cast<int>(i);
    r.objective = objective[i];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TrialResult run_algorithm(const ReceivedData& data, const std::vector<int>& truth,
                          const AlgorithmSpec& spec) {
  TrialResult r;
  r.truth = truth;
  const auto t0 = std::chrono::steady_clock::now();
  double rho = spec.alg1.rho;
  try {
    switch (spec.id) {
      case Algorithm::Alg1: {
        SolveResult s;
        if (spec.bits) {
          const ReceivedData view = cpu_view(data, *spec.bits, &r.ledger);
          s = alg1_solve(view, spec.alg1);
        } else {
          book_unquantized_upload(data, r.ledger);
          s = alg1_solve(data, spec.alg1);
        }
        r.soft = std::move(s.b);
        r.iterations = s.iterations;
        r.trace = std::move(s.trace);
        break;
      }
      case Algorithm::Alg2: {
        DistributedResult s = alg2_solve(data, spec.admm);
        rho = spec.admm.rho;
        r.soft = std::move(s.b);
        r.iterations = s.iterations;
        r.trace = std::move(s.trace);
        r.ledger = std::move(s.ledger);
        break;
      }
      case Algorithm::Alg3: {
        Alg3Options o;
        o.admm = spec.admm;
        o.admm.max_iters = spec.alg3_iters;
        o.inner = spec.alg3_inner;
        o.bits = spec.bits;
        rho = spec.admm.rho;
        DistributedResult s = alg3_solve(data, o);
        r.soft = std::move(s.b);
        r.iterations = s.iterations;
        r.trace = std::move(s.trace);
        r.ledger = std::move(s.ledger);
        break;
      }
      case Algorithm::Cde:
      case Algorithm::Bcd: {
        BaselineResult s =
            spec.id == Algorithm::Cde ? cde_solve(data, spec.baseline) : bcd_solve(data, spec.baseline);
        r.soft = std::move(s.b);
        r.iterations = s.sweeps;
        r.trace = objective_trace(s.objective);
        break;
      }
    }
    r.penalized_cost = penalized_cost(r.soft, data, rho);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  r.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return derive_seed(seed, static_cast<std::uint64_t>(trial));
}

DetectionReport summarize(const std::string& algorithm, std::vector<TrialResult> trials,
                          int grid_points) {
  DetectionReport rep;
  rep.algorithm = algorithm;
  std::vector<SoftSample> samples;
  double iters = 0.0, raw = 0.0, huff = 0.0, wall = 0.0;
  for (const auto& t : trials) {
    if (t.failed) {
      ++rep.failures;
      continue;
    }
    samples.push_back({t.soft, t.truth, t.block_len});
    iters += t.iterations;
    raw += static_cast<double>(t.ledger.raw_total());
    huff += static_cast<double>(t.ledger.huffman_total());
    wall += t.wall_ms;
  }
  rep.trials = std::move(trials);
  if (samples.empty()) {
    rep.equal_error.degenerate = true;
    rep.equal_error.p_err = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const auto ok = static_cast<double>(samples.size());
  rep.mean_iters = iters / ok;
  rep.mean_raw_bits = raw / ok;
  rep.mean_huffman_bits = huff / ok;
  rep.mean_wall_ms = wall / ok;
  rep.roc = pooled_roc(samples, uniform_grid(grid_points));
  rep.equal_error = equal_error_rate(samples, grid_points);
  return rep;
}

std::vector<DetectionReport> run_monte_carlo(const SystemConfig& config,
                                             const std::vector<AlgorithmSpec>& algorithms,
                                             const MonteCarloOptions& opts) {
  config.validate();
  if (opts.trials < 1) throw ConfigError("trials: must be at least 1");
  if (algorithms.empty()) throw ConfigError("algorithms: empty list");

  const auto n_trials = static_cast<std::size_t>(opts.trials);
  const std::size_t n_alg = algorithms.size();
  std::vector<std::vector<TrialResult>> results(n_alg, std::vector<TrialResult>(n_trials));

  auto run_trial = [&](std::size_t i) {
    const std::uint64_t seed = trial_seed(opts.seed, static_cast<int>(i));
    try {
      const Scenario sc = generate_scenario(config, seed);
      const ReceivedData data = synthesize_received(sc, config, seed);
      const std::vector<int> truth = true_indicator(sc);
      for (std::size_t a = 0; a < n_alg; ++a) {
        TrialResult r = run_algorithm(data, truth, algorithms[a]);
        r.trial = i;
        r.block_len = data.layout().block_len;
        results[a][i] = std::move(r);
      }
    } catch (const std::exception& e) {
      for (std::size_t a = 0; a < n_alg; ++a) {
        results[a][i].trial = i;
        results[a][i].failed = true;
        results[a][i].error = e.what();
      }
    }
  };

  unsigned workers = opts.workers > 0 ? static_cast<unsigned>(opts.workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_trials));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_trials; ++i) run_trial(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_trials; i = next++) run_trial(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<DetectionReport> reports;
  reports.reserve(n_alg);
  for (std::size_t a = 0; a < n_alg; ++a) {
    reports.push_back(summarize(algorithms[a].name(), std::move(results[a]), opts.grid_points));
  }
  return reports;
}

}  // namespace asyncact
