#include <doctest.h>

#include <cmath>
#include <random>

#include "asyncact/eval.hpp"
#include "test_util.hpp"

using namespace asyncact;

namespace {

SoftSample worked_example() {
  SoftSample s;
  s.soft.resize(6);
  s.soft << 0.1, 0.9, 0.6, 0.0, 0.0, 0.8;
  s.truth = {1, 0, 0, 0, 0, 1};
  s.block_len = 2;
  return s;
}

// direct PM/PF of one sample, written independently of the library
std::pair<double, double> manual_pm_pf(const SoftSample& s, double gamma) {
  int act = 0, inact = 0, miss = 0, fa = 0;
  const auto L = static_cast<Eigen::Index>(s.block_len);
  for (Eigen::Index off = 0; off < s.soft.size(); off += L) {
    int true_t = -1;
    for (Eigen::Index t = 0; t < L; ++t) {
      if (s.truth[static_cast<std::size_t>(off + t)]) true_t = static_cast<int>(t);
    }
    int best = 0;
    for (Eigen::Index t = 1; t < L; ++t) {
      if (s.soft(off + t) > s.soft(off + best)) best = static_cast<int>(t);
    }
    const bool det = s.soft(off + best) > gamma;
    if (true_t >= 0) {
      ++act;
      if (!det || best != true_t) ++miss;
    } else {
      ++inact;
      if (det) ++fa;
    }
  }
  return {static_cast<double>(miss) / act, static_cast<double>(fa) / inact};
}

}  // namespace

TEST_CASE("detection metrics worked example") {
  const SoftSample s = worked_example();
  const DetectionMetrics m = detection_metrics(s.soft, s.truth, 2, 0.5);
  CHECK(m.pm == doctest::Approx(0.5));
  CHECK(m.pf == doctest::Approx(1.0));

  RVec perfect(6);
  for (int i = 0; i < 6; ++i) perfect(i) = s.truth[i];
  const DetectionMetrics p = detection_metrics(perfect, s.truth, 2, 0.5);
  CHECK(p.pm == 0.0);
  CHECK(p.pf == 0.0);

  const DetectionMetrics top = detection_metrics(s.soft, s.truth, 2, 1.0);
  CHECK(top.pm == 1.0);
  CHECK(top.pf == 0.0);
}

TEST_CASE("ties go to the lowest delay") {
  RVec soft(2);
  soft << 0.7, 0.7;
  const std::vector<int> truth_t0{1, 0}, truth_t1{0, 1};
  CHECK(detection_metrics(soft, truth_t0, 2, 0.5).pm == 0.0);
  CHECK(detection_metrics(soft, truth_t1, 2, 0.5).pm == 1.0);
}

TEST_CASE("undefined denominators are NaN") {
  RVec soft = RVec::Zero(4);
  const std::vector<int> none{0, 0, 0, 0}, all{1, 0, 0, 1};
  CHECK(std::isnan(detection_metrics(soft, none, 2, 0.5).pm));
  CHECK(detection_metrics(soft, none, 2, 0.5).pf == 0.0);
  CHECK(std::isnan(detection_metrics(soft, all, 2, 0.5).pf));

  DetectionCounts c;
  CHECK(std::isnan(c.pm()));
  CHECK(std::isnan(c.pf()));
}

TEST_CASE("roc extremes on a perfect detector") {
  const SoftSample s = worked_example();
  RVec perfect(6);
  for (int i = 0; i < 6; ++i) perfect(i) = s.truth[i];
  const std::vector<double> grid{0.0, 1.0};
  const auto roc = roc_sweep(perfect, s.truth, 2, grid);
  REQUIRE(roc.size() == 2);
  // strict threshold: exact zeros never fire, even at gamma = 0
  CHECK(roc[0].pm == 0.0);
  CHECK(roc[0].pf == 0.0);
  CHECK(roc[1].pm == 1.0);
  CHECK(roc[1].pf == 0.0);

  // any positive soft value fires at gamma = 0
  RVec leaky = perfect.array() + 1e-9;
  const auto roc2 = roc_sweep(leaky, s.truth, 2, grid);
  CHECK(roc2[0].pm == 0.0);
  CHECK(roc2[0].pf == 1.0);
}

TEST_CASE("roc curves are monotone and match a manual count") {
  std::mt19937_64 rng(3);
  const auto grid = uniform_grid();
  CHECK(grid.size() == 101);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  std::vector<SoftSample> samples;
  for (int rep = 0; rep < 20; ++rep) {
    SoftSample s;
    s.block_len = 3;
    s.soft = testutil::random_box(90, rng);
    s.truth.assign(90, 0);
    for (int k = 0; k < 30; k += 3) s.truth[static_cast<std::size_t>(3 * k + rep % 3)] = 1;
    const auto roc = roc_sweep(s.soft, s.truth, 3, grid);
    for (std::size_t i = 0; i < roc.size(); ++i) {
      const auto [pm, pf] = manual_pm_pf(s, grid[i]);
      CHECK(roc[i].pm == doctest::Approx(pm));
      CHECK(roc[i].pf == doctest::Approx(pf));
      CHECK(roc[i].pm >= 0.0);
      CHECK(roc[i].pf <= 1.0);
      if (i > 0) {
        CHECK(roc[i].pm >= roc[i - 1].pm);
        CHECK(roc[i].pf <= roc[i - 1].pf);
      }
    }
    samples.push_back(std::move(s));
  }

  // equal denominators per trial: pooled curve = average of per-trial curves
  const auto pooled = pooled_roc(samples, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double pm = 0.0, pf = 0.0;
    for (const auto& s : samples) {
      const auto [a, b] = manual_pm_pf(s, grid[i]);
      pm += a / samples.size();
      pf += b / samples.size();
    }
    CHECK(std::abs(pooled[i].pm - pm) <= 1e-12);
    CHECK(std::abs(pooled[i].pf - pf) <= 1e-12);
  }
}

TEST_CASE("equal error: perfect detector is degenerate with zero error") {
  SoftSample s = worked_example();
  for (int i = 0; i < 6; ++i) s.soft(i) = s.truth[i];
  const std::vector<SoftSample> v{s};
  const EqualError e = equal_error_rate(v);
  CHECK(e.degenerate);
  CHECK(e.p_err == 0.0);
  CHECK(e.gamma > 0.0);
  CHECK(e.gamma < 1.0);
}

TEST_CASE("equal error: constructed crossing") {
  // PM(g) = g and PF(g) = 1 - g up to the 1/n grid of soft values
  const int n = 1000;
  SoftSample s;
  s.block_len = 1;
  s.soft.resize(2 * n);
  s.truth.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    s.soft(i) = (i + 0.5) / n;
    s.truth[static_cast<std::size_t>(i)] = 1;
    s.soft(n + i) = (i + 0.5) / n;
  }
  const std::vector<SoftSample> v{s};
  const EqualError e = equal_error_rate(v);
  CHECK_FALSE(e.degenerate);
  CHECK(e.gamma == doctest::Approx(0.5).epsilon(1.0 / n));
  CHECK(e.p_err == doctest::Approx(0.5));
  CHECK(std::abs(e.pm - e.pf) <= 2.0 / n + 1e-12);  // PM and PF jump together
}

TEST_CASE("equal error: random guessing sits near one half") {
  std::mt19937_64 rng(9);
  std::vector<SoftSample> v;
  for (int trial = 0; trial < 100; ++trial) {
    SoftSample s;
    s.block_len = 1;
    s.soft = testutil::random_box(100, rng);
    s.truth.assign(100, 0);
    for (int k = 0; k < 10; ++k) s.truth[static_cast<std::size_t>(10 * k + trial % 10)] = 1;
    v.push_back(std::move(s));
  }
  const EqualError e = equal_error_rate(v);
  CHECK(std::abs(e.p_err - 0.5) <= 0.1);
  const DetectionCounts c = pooled_counts(v, e.gamma);
  CHECK(e.pm == doctest::Approx(c.pm()));
  CHECK(e.pf == doctest::Approx(c.pf()));
}

TEST_CASE("algorithm names") {
  for (Algorithm a : {Algorithm::Alg1, Algorithm::Alg2, Algorithm::Alg3, Algorithm::Cde,
                      Algorithm::Bcd}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm("alg4"), ConfigError);
}

TEST_CASE("monte carlo: single trial equals a manual pipeline") {
  SystemConfig c = testutil::small_config(2, 4, 10, 6, 1, 77);
  AlgorithmSpec spec;
  MonteCarloOptions mc;
  mc.trials = 1;
  mc.seed = 5;
  mc.workers = 1;
  const auto reports = run_monte_carlo(c, {spec}, mc);
  REQUIRE(reports.size() == 1);
  REQUIRE(reports[0].trials.size() == 1);

  const std::uint64_t seed = trial_seed(5, 0);
  const Scenario sc = generate_scenario(c, seed);
  const ReceivedData d = synthesize_received(sc, c, seed);
  const SolveResult r = alg1_solve(d, SolveOptions{});
  CHECK(reports[0].trials[0].soft == r.b);
  CHECK(reports[0].trials[0].truth == true_indicator(sc));
  CHECK(reports[0].trials[0].iterations == r.iterations);
  CHECK(reports[0].failures == 0);
}

TEST_CASE("monte carlo is deterministic across runs and worker counts") {
  SystemConfig c = testutil::small_config(2, 4, 12, 6, 1, 3);
  std::vector<AlgorithmSpec> algs(3);
  algs[1].id = Algorithm::Cde;
  algs[2].id = Algorithm::Alg3;
  algs[2].alg3_iters = 1;
  algs[2].bits = 4;
  MonteCarloOptions mc;
  mc.trials = 6;
  mc.seed = 42;
  mc.workers = 1;
  const auto a = run_monte_carlo(c, algs, mc);
  mc.workers = 3;
  const auto b = run_monte_carlo(c, algs, mc);
  const auto again = run_monte_carlo(c, algs, mc);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].algorithm == b[i].algorithm);
    CHECK(a[i].equal_error.p_err == b[i].equal_error.p_err);
    CHECK(a[i].equal_error.gamma == b[i].equal_error.gamma);
    CHECK(a[i].mean_raw_bits == b[i].mean_raw_bits);
    CHECK(a[i].mean_huffman_bits == b[i].mean_huffman_bits);
    CHECK(b[i].equal_error.p_err == again[i].equal_error.p_err);
    for (std::size_t t = 0; t < a[i].trials.size(); ++t) {
      CHECK(a[i].trials[t].soft == b[i].trials[t].soft);
      CHECK(a[i].trials[t].trial == b[i].trials[t].trial);
    }
    for (std::size_t g = 0; g < a[i].roc.size(); ++g) {
      CHECK(a[i].roc[g].pm == b[i].roc[g].pm);
      CHECK(a[i].roc[g].pf == b[i].roc[g].pf);
    }
  }
  CHECK(a[2].mean_raw_bits == bits_alg3(2, 12, 4, 1, 1));
}

TEST_CASE("more distributed antennas help at a fixed total") {
  SystemConfig spread = testutil::small_config(8, 8, 30, 9, 1, 21);
  SystemConfig single = testutil::small_config(1, 64, 30, 9, 1, 21);
  MonteCarloOptions mc;
  mc.trials = 200;
  mc.seed = 8;
  const auto a = run_monte_carlo(spread, {AlgorithmSpec{}}, mc);
  const auto b = run_monte_carlo(single, {AlgorithmSpec{}}, mc);
  MESSAGE("M=8,N=8 p_err " << a[0].equal_error.p_err << "; M=1,N=64 p_err "
                           << b[0].equal_error.p_err);
  CHECK(a[0].equal_error.p_err < b[0].equal_error.p_err);
}
