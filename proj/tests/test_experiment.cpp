#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asyncact/experiment.hpp"
#include "asyncact/json_io.hpp"

using namespace asyncact;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kSmallSpec = R"({
  "schema_version": 1,
  "name": "small",
  "system": {"num_aps": 2, "antennas_per_ap": 4, "num_devices": 12, "sig_len": 6, "max_delay": 1},
  "algorithms": [
    {"id": "alg1", "max_iters": 300},
    {"id": "alg3", "iters": 1, "bits": 4, "label": "alg3_q4"},
    {"id": "bcd"}
  ],
  "trials": 3,
  "seed": 9,
  "output": "OUT"
})";

std::string error_of(const std::string& text) {
  try {
    parse_spec_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("asyncact_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string with_output(const fs::path& out) {
  std::string s = kSmallSpec;
  s.replace(s.find("OUT"), 3, out.string());
  return s;
}

}  // namespace

TEST_CASE("spec parsing") {
  const ExperimentSpec s = parse_spec_text(kSmallSpec);
  CHECK(s.name == "small");
  CHECK(s.system.num_aps == 2);
  CHECK(s.system.num_devices == 12);
  CHECK(s.system.noise_power_dbm == -104.0);  // untouched defaults survive
  REQUIRE(s.algorithms.size() == 3);
  CHECK(s.algorithms[0].alg1.max_iters == 300);
  CHECK(s.algorithms[1].id == Algorithm::Alg3);
  CHECK(s.algorithms[1].alg3_iters == 1);
  CHECK(s.algorithms[1].bits == 4);
  CHECK(s.algorithms[1].name() == "alg3_q4");
  CHECK(s.algorithms[2].name() == "bcd");
  CHECK(s.trials == 3);
  CHECK(s.seed == 9);
  CHECK(s.sweep.axis == SweepAxis::None);

  // round trip
  const ExperimentSpec back = parse_spec(to_json(s));
  CHECK(to_json(back) == to_json(s));
}

TEST_CASE("spec errors name the field") {
  json j = json::parse(kSmallSpec);
  auto msg = [&](const json& v) {
    try {
      parse_spec(v);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  auto contains = [](const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
  };

  json a = j;
  a["system"]["sig_len"] = 0;
  CHECK(contains(msg(a), "system.sig_len"));

  a = j;
  a["system"]["bogus"] = 1;
  CHECK(contains(msg(a), "system.bogus"));

  a = j;
  a["algorithms"][1]["id"] = "alg9";
  CHECK(contains(msg(a), "algorithms[1]"));

  a = j;
  a["algorithms"][0]["rho"] = -1.0;
  CHECK(contains(msg(a), "algorithms[0].rho"));

  a = j;
  a["algorithms"][2]["mu"] = 1.0;  // not an option of bcd
  CHECK(contains(msg(a), "algorithms[2].mu"));

  a = j;
  a["trials"] = "many";
  CHECK(contains(msg(a), "trials"));

  a = j;
  a.erase("schema_version");
  CHECK(contains(msg(a), "schema_version"));

  a = j;
  a["schema_version"] = 7;
  CHECK(contains(msg(a), "schema_version"));

  a = j;
  a["sweep"] = {{"axis", "total_antennas"}, {"values", {3}}, {"total_antennas", 64}};
  CHECK(contains(msg(a), "sweep.values[0]"));

  a = j;
  a["sweep"] = {{"axis", "diagonal"}, {"values", {1}}};
  CHECK(contains(msg(a), "sweep.axis"));
}

TEST_CASE("malformed JSON reports line and column") {
  const std::string text = "{\n  \"schema_version\": 1,\n  \"name\": }\n";
  try {
    parse_spec_text(text);
    FAIL("expected SpecParseError");
  } catch (const SpecParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 11);  // the stray '}'
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(line_column("ab\ncd", 0) == std::pair{1, 1});
  CHECK(line_column("ab\ncd", 4) == std::pair{2, 2});
  CHECK(error_of("[1, 2") != "");
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    const ExperimentSpec s = preset(name);
    CHECK_NOTHROW(s.validate());
    CHECK(to_json(parse_spec(to_json(s))) == to_json(s));
  }
  CHECK_THROWS_AS(preset("fig9"), ConfigError);

  const ExperimentSpec f1 = preset("fig1");
  CHECK(f1.system.num_aps == 8);
  CHECK(f1.system.antennas_per_ap == 8);
  CHECK(f1.system.sig_len == 9);
  CHECK(f1.system.max_delay == 1);
  std::vector<std::string> names;
  for (const auto& a : f1.algorithms) names.push_back(a.name());
  CHECK(names == std::vector<std::string>{"alg1", "cde", "bcd"});

  const ExperimentSpec half = apply_scale(f1, 0.5);
  CHECK(half.system.num_devices == 50);
  CHECK(half.trials == f1.trials / 2);
  CHECK(apply_scale(f1, 0.001).system.num_devices == 10);
  CHECK(apply_scale(f1, 0.0001).trials == 1);
}

TEST_CASE("sweep expansion") {
  const auto t = expand_sweep(preset("fig2a"));
  REQUIRE(t.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(t[i].config.max_delay == i);
    CHECK(t[i].config.sig_len + t[i].config.max_delay == 10);
    CHECK(t[i].label == "T=" + std::to_string(i));
  }

  const auto m = expand_sweep(preset("fig2b"));
  REQUIRE(!m.empty());
  for (const auto& p : m) CHECK(p.config.num_aps * p.config.antennas_per_ap == 64);

  ExperimentSpec b = parse_spec_text(kSmallSpec);
  b.sweep.axis = SweepAxis::Bits;
  b.sweep.values = {3, 6};
  const auto pts = expand_sweep(b);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].label == "bits=6");
  // only quantized algorithms pick up the swept bit width
  CHECK(pts[1].algorithms[1].bits == 6);
  CHECK(!pts[1].algorithms[2].bits.has_value());

  CHECK(expand_sweep(parse_spec_text(kSmallSpec)).size() == 1);
}

TEST_CASE("run experiment writes deterministic outputs") {
  const fs::path out = scratch("run");
  ExperimentSpec s = parse_spec_text(with_output(out));
  std::ostringstream log;
  RunOptions ro;
  ro.workers = 2;
  ro.log = &log;
  const ExperimentResult r = run_experiment(s, ro);
  CHECK(r.failures == 0);
  REQUIRE(r.points.size() == 1);
  CHECK(!log.str().empty());

  CHECK(first_line(out / "roc.csv") == "algorithm,gamma,pm,pf");
  CHECK(first_line(out / "summary.csv") ==
        "algorithm,equal_error_gamma,p_err,mean_iters,raw_bits,huffman_bits,wall_ms");
  CHECK(first_line(out / "trace.csv").rfind("algorithm,trial,iter,objective,residual", 0) == 0);
  CHECK(fs::exists(out / "ledger.csv"));
  const json summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary.contains("metadata"));
  CHECK(summary["metadata"].contains("generated_at"));

  const std::string roc = slurp(out / "roc.csv"), trace = slurp(out / "trace.csv"),
                    ledger = slurp(out / "ledger.csv");
  ro.workers = 1;
  run_experiment(s, ro);
  CHECK(slurp(out / "roc.csv") == roc);
  CHECK(slurp(out / "trace.csv") == trace);
  CHECK(slurp(out / "ledger.csv") == ledger);
  json again = json::parse(slurp(out / "summary.json"));
  json first = summary;
  again.erase("metadata");
  first.erase("metadata");
  CHECK(again == first);
  fs::remove_all(out);
}

TEST_CASE("bits preset reproduces the closed-form budgets") {
  const fs::path out = scratch("bits");
  ExperimentSpec s = preset("bits");
  s.output = out.string();
  const ExperimentResult r = run_experiment(s, RunOptions{});
  REQUIRE(r.points.size() == 1);
  const auto& reps = r.points[0].reports;
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].mean_raw_bits == 11200);
  CHECK(reps[1].mean_raw_bits == 6400);
  CHECK(reps[1].mean_huffman_bits / reps[1].mean_raw_bits <
        reps[0].mean_huffman_bits / reps[0].mean_raw_bits);
  fs::remove_all(out);
}
