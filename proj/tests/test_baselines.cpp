#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asyncact/baselines.hpp"
#include "test_util.hpp"

using namespace asyncact;

namespace {

int block_l0(const RVec& b, int block, Eigen::Index off) {
  int n = 0;
  for (int t = 0; t < block; ++t) n += b(off + t) != 0.0;
  return n;
}

ReceivedData single_device(int k, int delay, std::uint64_t seed) {
  SystemConfig c = testutil::small_config(2, 16, 4, 8, 1);
  c.target_snr_db = 30.0;
  Scenario sc = generate_scenario(c, seed);
  std::fill(sc.active.begin(), sc.active.end(), 0);
  sc.active[k] = 1;
  sc.delays[k] = delay;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<std::vector<CVec>> h(4, std::vector<CVec>(2, CVec(16)));
  for (auto& hk : h) {
    for (auto& hm : hk) {
      for (Eigen::Index n = 0; n < 16; ++n) hm(n) = cd(nd(rng), nd(rng));
    }
  }
  return assemble_received(sc, c, h, {});
}

}  // namespace

TEST_CASE("scalar minimizer: single AP closed form") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double x1 = u(rng), x2 = u(rng) * 2.0;
    const double want = std::clamp((x2 - x1) / (x1 * x1), 0.0, 1.0);
    CHECK(minimize_1d_multiap({{{x1, x2}}}) == doctest::Approx(want).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("scalar minimizer: no signal gives zero") {
  CHECK(minimize_1d_multiap({{{1.0, 0.0}, {3.0, 0.0}, {0.2, 0.0}}}) == 0.0);
}

TEST_CASE("scalar minimizer against a dense scan") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Scalar1DProblem p;
    for (int m = 0; m < 4; ++m) {
      // mix weak and strong APs so interior minima are common
      const double x1 = std::pow(10.0, 3.0 * u(rng) - 1.0);
      p.coeffs.emplace_back(x1, x1 * (0.5 + 2.0 * u(rng)) * (1.0 + x1 * u(rng)));
    }
    const auto f = [&](double x) { return p.value(x); };
    const double want = testutil::scan_golden(f, 0.0, 1.0, 100000);
    const double got = minimize_1d_multiap(p);
    CHECK(f(got) <= f(want) + 1e-12 * std::max(1.0, std::abs(f(want))));
    if (std::abs(got - want) > 1e-5) CHECK(std::abs(f(got) - f(want)) <= 1e-10);
  }
}

TEST_CASE("cd-e output is one-sparse per block and descends") {
  for (std::uint64_t trial = 1; trial <= 3; ++trial) {
    const auto in = testutil::make_instance(testutil::small_config(2, 8, 12, 6, 2), trial);
    const BaselineResult r = cde_solve(in.data);
    for (Eigen::Index off = 0; off < r.b.size(); off += 3) CHECK(block_l0(r.b, 3, off) <= 1);
    CHECK((r.b.array() >= 0.0).all());
    CHECK((r.b.array() <= 1.0).all());
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      CHECK(r.objective[i] <= r.objective[i - 1] + 1e-9 * std::abs(r.objective[i - 1]));
    }
  }
}

TEST_CASE("bcd iterates stay one-sparse and descend") {
  for (std::uint64_t trial = 1; trial <= 3; ++trial) {
    const auto in = testutil::make_instance(testutil::small_config(2, 8, 12, 6, 2), trial);
    const BaselineResult r = bcd_solve(in.data);
    for (Eigen::Index off = 0; off < r.b.size(); off += 3) CHECK(block_l0(r.b, 3, off) <= 1);
    CHECK((r.b.array() >= 0.0).all());
    CHECK((r.b.array() <= 1.0).all());
    REQUIRE(r.objective.size() > 1);
    for (std::size_t i = 1; i < r.objective.size(); ++i) {
      CHECK(r.objective[i] <= r.objective[i - 1] + 1e-9 * std::abs(r.objective[i - 1]));
    }
    CHECK(r.objective.back() == doctest::Approx(testutil::dense_nll(r.b, in.data)).epsilon(1e-10));
  }
}

TEST_CASE("baselines recover a single noiseless device") {
  for (int k = 0; k < 4; ++k) {
    const int delay = k % 2;
    const ReceivedData d = single_device(k, delay, 10 + static_cast<std::uint64_t>(k));
    for (const BaselineResult& r : {cde_solve(d), bcd_solve(d)}) {
      Eigen::Index best = 0;
      r.b.maxCoeff(&best);
      CHECK(best == 2 * k + delay);
      CHECK(r.b(best) > 0.5);
      RVec rest = r.b;
      rest(best) = 0.0;
      CHECK(rest.cwiseAbs().maxCoeff() <= 1e-3);
    }
  }
}
