#include "asyncact/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "asyncact/json_io.hpp"

namespace asyncact {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::None:
      return "none";
    case SweepAxis::T:
      return "T";
    case SweepAxis::M:
      return "M";
    case SweepAxis::TotalAntennas:
      return "total_antennas";
    case SweepAxis::Bits:
      return "bits";
  }
  return "none";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::None, SweepAxis::T, SweepAxis::M, SweepAxis::TotalAntennas,
                      SweepAxis::Bits}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("sweep.axis: unknown axis '" + s + "' (expected none|T|M|total_antennas|bits)");
}

void ExperimentSpec::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(schema_version));
  }
  try {
    system.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("system.") + e.what());
  }
  if (algorithms.empty()) throw ConfigError("algorithms: at least one algorithm is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    const auto& a = algorithms[i];
    const std::string path = "algorithms[" + std::to_string(i) + "]";
    if (!names.insert(a.name()).second) {
      throw ConfigError(path + ".label: duplicate name '" + a.name() + "'");
    }
    try {
      a.alg1.validate();
      a.admm.validate();
      a.alg3_inner.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(path + "." + e.what());
    }
    if (a.alg3_iters < 1) throw ConfigError(path + ".iters: must be at least 1");
    if (a.baseline.max_sweeps < 1) throw ConfigError(path + ".max_sweeps: must be at least 1");
    if (a.bits && (*a.bits < 1 || *a.bits > 32)) {
      throw ConfigError(path + ".bits: must be in 1..32");
    }
  }
  if (trials < 1) throw ConfigError("trials: must be at least 1");
  if (grid_points < 2) throw ConfigError("grid_points: must be at least 2");
  if (output.empty()) throw ConfigError("output: empty path");

  if (sweep.axis == SweepAxis::None) return;
  if (sweep.values.empty()) throw ConfigError("sweep.values: empty list for axis " + to_string(sweep.axis));
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const int v = sweep.values[i];
    const std::string path = "sweep.values[" + std::to_string(i) + "]";
    switch (sweep.axis) {
      case SweepAxis::T:
        if (v < 0) throw ConfigError(path + ": T must be non-negative");
        if (sweep.fixed_effective_len && *sweep.fixed_effective_len - v < 1) {
          throw ConfigError(path + ": T leaves no room for L within fixed_effective_len");
        }
        break;
      case SweepAxis::M:
        if (v < 1) throw ConfigError(path + ": M must be positive");
        break;
      case SweepAxis::TotalAntennas:
        if (v < 1) throw ConfigError(path + ": M must be positive");
        if (sweep.total_antennas <= 0) {
          throw ConfigError("sweep.total_antennas: required and positive for this axis");
        }
        if (sweep.total_antennas % v != 0) {
          throw ConfigError(path + ": total_antennas " + std::to_string(sweep.total_antennas) +
                            " is not divisible by M=" + std::to_string(v));
        }
        break;
      case SweepAxis::Bits:
        if (v < 1 || v > 32) throw ConfigError(path + ": bits must be in 1..32");
        break;
      case SweepAxis::None:
        break;
    }
  }
  if (sweep.axis == SweepAxis::Bits) {
    bool any = false;
    for (const auto& a : algorithms) any = any || a.bits.has_value();
    if (!any) throw ConfigError("sweep.axis: bits sweep but no algorithm sets 'bits'");
  }
}

std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  const std::size_t end = std::min(offset, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

namespace {

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + "." + key + ": unknown field");
  }
}

template <class T>
void get(const json& j, const std::string& path, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw ConfigError(path + "." + key + ": expected a number");
  }
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

AlgorithmSpec parse_algorithm_spec(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  if (!j.contains("id")) throw ConfigError(path + ".id: missing");
  std::string id;
  get(j, path, "id", id);
  AlgorithmSpec a;
  try {
    a.id = parse_algorithm(id);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ".id: " + e.what());
  }
  switch (a.id) {
    case Algorithm::Alg1:
      check_keys(j, path, {"id", "label", "rho", "max_iters", "tol", "bits"});
      break;
    case Algorithm::Alg2:
      check_keys(j, path, {"id", "label", "rho", "mu", "delta", "max_iters", "tol"});
      break;
    case Algorithm::Alg3:
      check_keys(j, path,
                 {"id", "label", "rho", "mu", "delta", "iters", "inner_max_iters", "bits"});
      break;
    case Algorithm::Cde:
    case Algorithm::Bcd:
      check_keys(j, path, {"id", "label", "max_sweeps", "tol"});
      break;
  }
  get(j, path, "label", a.label);
  double rho = a.alg1.rho;
  get(j, path, "rho", rho);
  a.alg1.rho = rho;
  a.admm.rho = rho;
  get(j, path, "mu", a.admm.mu);
  get(j, path, "delta", a.admm.delta);
  if (a.id == Algorithm::Alg1) {
    get(j, path, "max_iters", a.alg1.max_iters);
    get(j, path, "tol", a.alg1.tol_step);
  } else if (a.id == Algorithm::Alg2) {
    get(j, path, "max_iters", a.admm.max_iters);
    get(j, path, "tol", a.admm.tol);
  } else {
    get(j, path, "max_sweeps", a.baseline.max_sweeps);
    get(j, path, "tol", a.baseline.tol);
  }
  get(j, path, "iters", a.alg3_iters);
  get(j, path, "inner_max_iters", a.alg3_inner.max_iters);
  if (j.contains("bits") && !j["bits"].is_null()) {
    int bits = 0;
    get(j, path, "bits", bits);
    a.bits = bits;
  }
  return a;
}

}  // namespace

ExperimentSpec parse_spec(const json& j) {
  check_keys(j, "spec",
             {"schema_version", "name", "system", "algorithms", "sweep", "trials", "seed",
              "output", "grid_points"});
  ExperimentSpec s;
  if (!j.contains("schema_version")) throw ConfigError("schema_version: missing");
  get(j, "spec", "schema_version", s.schema_version);
  if (s.schema_version != kSchemaVersion) {
    throw ConfigError("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(s.schema_version));
  }
  get(j, "spec", "name", s.name);
  if (j.contains("system")) {
    try {
      s.system = config_from_json(j["system"]);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      throw ConfigError(msg.rfind("system", 0) == 0 ? msg : "system." + msg);
    }
  }
  if (!j.contains("algorithms") || !j["algorithms"].is_array()) {
    throw ConfigError("algorithms: expected a list");
  }
  for (std::size_t i = 0; i < j["algorithms"].size(); ++i) {
    s.algorithms.push_back(
        parse_algorithm_spec(j["algorithms"][i], "algorithms[" + std::to_string(i) + "]"));
  }
  if (j.contains("sweep")) {
    const json& w = j["sweep"];
    check_keys(w, "sweep", {"axis", "values", "fixed_effective_len", "total_antennas"});
    std::string axis = "none";
    get(w, "sweep", "axis", axis);
    s.sweep.axis = parse_sweep_axis(axis);
    if (w.contains("values")) {
      if (!w["values"].is_array()) throw ConfigError("sweep.values: expected a list");
      for (std::size_t i = 0; i < w["values"].size(); ++i) {
        if (!w["values"][i].is_number_integer()) {
          throw ConfigError("sweep.values[" + std::to_string(i) + "]: expected an integer");
        }
        s.sweep.values.push_back(w["values"][i].get<int>());
      }
    }
    if (w.contains("fixed_effective_len") && !w["fixed_effective_len"].is_null()) {
      int len = 0;
      get(w, "sweep", "fixed_effective_len", len);
      s.sweep.fixed_effective_len = len;
    }
    get(w, "sweep", "total_antennas", s.sweep.total_antennas);
  }
  get(j, "spec", "trials", s.trials);
  get(j, "spec", "seed", s.seed);
  get(j, "spec", "output", s.output);
  get(j, "spec", "grid_points", s.grid_points);
  s.validate();
  return s;
}

ExperimentSpec parse_spec_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is 1-based and points just past the offending character
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_column(text, off);
    throw SpecParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(col),
                         line, col);
  }
  return parse_spec(j);
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open spec file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

json to_json(const AlgorithmSpec& a) {
  json j = {{"id", to_string(a.id)}};
  if (!a.label.empty()) j["label"] = a.label;
  switch (a.id) {
    case Algorithm::Alg1:
      j["rho"] = a.alg1.rho;
      j["max_iters"] = a.alg1.max_iters;
      j["tol"] = a.alg1.tol_step;
      break;
    case Algorithm::Alg2:
      j["rho"] = a.admm.rho;
      j["mu"] = a.admm.mu;
      j["delta"] = a.admm.delta;
      j["max_iters"] = a.admm.max_iters;
      j["tol"] = a.admm.tol;
      break;
    case Algorithm::Alg3:
      j["rho"] = a.admm.rho;
      j["mu"] = a.admm.mu;
      j["delta"] = a.admm.delta;
      j["iters"] = a.alg3_iters;
      j["inner_max_iters"] = a.alg3_inner.max_iters;
      break;
    case Algorithm::Cde:
    case Algorithm::Bcd:
      j["max_sweeps"] = a.baseline.max_sweeps;
      j["tol"] = a.baseline.tol;
      break;
  }
  if (a.bits) j["bits"] = *a.bits;
  return j;
}

json to_json(const ExperimentSpec& s) {
  json algs = json::array();
  for (const auto& a : s.algorithms) algs.push_back(to_json(a));
  json sweep = {{"axis", to_string(s.sweep.axis)}, {"values", s.sweep.values}};
  if (s.sweep.fixed_effective_len) sweep["fixed_effective_len"] = *s.sweep.fixed_effective_len;
  if (s.sweep.total_antennas > 0) sweep["total_antennas"] = s.sweep.total_antennas;
  return {
      {"schema_version", s.schema_version},
      {"name", s.name},
      {"system", to_json(s.system)},
      {"algorithms", std::move(algs)},
      {"sweep", std::move(sweep)},
      {"trials", s.trials},
      {"seed", s.seed},
      {"output", s.output},
      {"grid_points", s.grid_points},
  };
}

std::vector<std::string> preset_names() {
  return {"fig1", "fig2a", "fig2b", "fig3", "fig4", "fig5", "bits"};
}

namespace {

AlgorithmSpec algo(Algorithm id, std::string label = {}, std::optional<int> bits = {},
                   int alg3_iters = 3) {
  AlgorithmSpec a;
  a.id = id;
  a.label = std::move(label);
  a.bits = bits;
  a.alg3_iters = alg3_iters;
  return a;
}

}  // namespace

ExperimentSpec preset(const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  s.output = "out/" + name;
  s.trials = 1000;
  // M = N = 8, K = 100, L = 9, T = 1 are the SystemConfig defaults
  if (name == "fig1") {
    s.algorithms = {algo(Algorithm::Alg1), algo(Algorithm::Cde), algo(Algorithm::Bcd)};
  } else if (name == "fig2a") {
    s.algorithms = {algo(Algorithm::Alg1), algo(Algorithm::Cde), algo(Algorithm::Bcd)};
    s.sweep.axis = SweepAxis::T;
    s.sweep.values = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    s.sweep.fixed_effective_len = 10;
  } else if (name == "fig2b") {
    s.algorithms = {algo(Algorithm::Alg1), algo(Algorithm::Cde), algo(Algorithm::Bcd)};
    s.sweep.axis = SweepAxis::TotalAntennas;
    s.sweep.values = {1, 2, 4, 8, 16};
    s.sweep.total_antennas = 64;
  } else if (name == "fig3") {
    s.trials = 20;
    AlgorithmSpec a2 = algo(Algorithm::Alg2);
    a2.admm.max_iters = 30;
    s.algorithms = {algo(Algorithm::Alg1), a2, algo(Algorithm::Alg3, "alg3", {}, 5)};
  } else if (name == "fig4") {
    s.algorithms = {algo(Algorithm::Alg1, "alg1_ideal"), algo(Algorithm::Alg1, "alg1_q14", 14),
                    algo(Algorithm::Alg1, "alg1_q16", 16),
                    algo(Algorithm::Alg3, "alg3_q4_i1", 4, 1)};
    s.sweep.axis = SweepAxis::T;
    s.sweep.values = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    s.sweep.fixed_effective_len = 10;
  } else if (name == "fig5") {
    s.algorithms = {algo(Algorithm::Alg1, "alg1_q11", 11), algo(Algorithm::Alg1, "alg1_q14", 14),
                    algo(Algorithm::Alg1, "alg1_q16", 16),
                    algo(Algorithm::Alg3, "alg3_q4_i1", 4, 1),
                    algo(Algorithm::Alg3, "alg3_q4_i2", 4, 2),
                    algo(Algorithm::Alg3, "alg3_q4_i3", 4, 3)};
  } else if (name == "bits") {
    s.trials = 1;
    s.algorithms = {algo(Algorithm::Alg1, "alg1_q14", 14),
                    algo(Algorithm::Alg3, "alg3_q4_i1", 4, 1)};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : "|") + n;
    throw ConfigError("unknown preset '" + name + "' (expected " + known + ")");
  }
  return s;
}

ExperimentSpec apply_scale(ExperimentSpec spec, double scale) {
  if (!(scale > 0.0)) throw ConfigError("scale: must be positive");
  spec.system.num_devices =
      std::max(10, static_cast<int>(std::lround(spec.system.num_devices * scale)));
  spec.trials = std::max(1, static_cast<int>(std::lround(spec.trials * scale)));
  return spec;
}

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec) {
  if (spec.sweep.axis == SweepAxis::None) {
    return {SweepPoint{"", 0, spec.system, spec.algorithms}};
  }
  std::vector<SweepPoint> pts;
  for (int v : spec.sweep.values) {
    SweepPoint p{"", v, spec.system, spec.algorithms};
    switch (spec.sweep.axis) {
      case SweepAxis::T:
        p.config.max_delay = v;
        if (spec.sweep.fixed_effective_len) p.config.sig_len = *spec.sweep.fixed_effective_len - v;
        p.label = "T=" + std::to_string(v);
        break;
      case SweepAxis::M:
        p.config.num_aps = v;
        p.label = "M=" + std::to_string(v);
        break;
      case SweepAxis::TotalAntennas:
        p.config.num_aps = v;
        p.config.antennas_per_ap = spec.sweep.total_antennas / v;
        p.label = "M=" + std::to_string(v);
        break;
      case SweepAxis::Bits:
        for (auto& a : p.algorithms) {
          if (a.bits) a.bits = v;
        }
        p.label = "bits=" + std::to_string(v);
        break;
      case SweepAxis::None:
        break;
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

namespace {

std::ostream& num(std::ostream& os, double v) {
  if (std::isnan(v)) return os << "nan";
  return os << std::setprecision(10) << v;
}

std::string point_dir(const SweepPoint& p) {
  std::string d = p.label;
  for (char& c : d) {
    if (c == '=') c = '_';
  }
  return d;
}

json report_json(const DetectionReport& r) {
  auto nan_null = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return {
      {"algorithm", r.algorithm},
      {"equal_error",
       {{"gamma", nan_null(r.equal_error.gamma)},
        {"p_err", nan_null(r.equal_error.p_err)},
        {"pm", nan_null(r.equal_error.pm)},
        {"pf", nan_null(r.equal_error.pf)},
        {"degenerate", r.equal_error.degenerate}}},
      {"trials", r.trials.size()},
      {"failures", r.failures},
      {"mean_iters", r.mean_iters},
      {"raw_bits", r.mean_raw_bits},
      {"huffman_bits", r.mean_huffman_bits},
  };
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  fn(os);
}

}  // namespace

void write_roc_csv(std::ostream& os, const std::vector<DetectionReport>& reports) {
  os << "algorithm,gamma,pm,pf\n";
  for (const auto& r : reports) {
    for (const auto& p : r.roc) {
      os << r.algorithm << ',';
      num(os, p.gamma) << ',';
      num(os, p.pm) << ',';
      num(os, p.pf) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& os, const std::vector<DetectionReport>& reports) {
  os << "algorithm,equal_error_gamma,p_err,mean_iters,raw_bits,huffman_bits,wall_ms\n";
  for (const auto& r : reports) {
    os << r.algorithm << ',';
    num(os, r.equal_error.gamma) << ',';
    num(os, r.equal_error.p_err) << ',';
    num(os, r.mean_iters) << ',';
    num(os, r.mean_raw_bits) << ',';
    num(os, r.mean_huffman_bits) << ',';
    num(os, r.mean_wall_ms) << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<DetectionReport>& reports) {
  os << "algorithm,trial,iter,objective,residual\n";
  for (const auto& r : reports) {
    for (const auto& t : r.trials) {
      for (const auto& row : t.trace) {
        os << r.algorithm << ',' << t.trial << ',' << row.iter << ',';
        num(os, row.objective) << ',';
        num(os, row.residual) << '\n';
      }
    }
  }
}

void write_ledger_csv(std::ostream& os, const std::vector<DetectionReport>& reports) {
  os << "algorithm,trial,ap,iteration,direction,raw_bits,huffman_bits,payload_len,zero_values\n";
  for (const auto& r : reports) {
    for (const auto& t : r.trials) {
      for (const auto& m : t.ledger.records()) {
        os << r.algorithm << ',' << t.trial << ',' << m.ap << ',' << m.iteration << ','
           << to_string(m.direction) << ',' << m.raw_bits << ',' << m.huffman_bits << ','
           << m.payload_len << ',' << m.zero_values << '\n';
      }
    }
  }
}

std::string digest(const std::string& name, const PointResult& r) {
  std::ostringstream os;
  os << name;
  if (!r.point.label.empty()) os << " [" << r.point.label << "]";
  os << ':';
  for (const auto& rep : r.reports) {
    os << ' ' << rep.algorithm << " p_err=" << std::setprecision(4) << rep.equal_error.p_err
       << " gamma=" << std::setprecision(4) << rep.equal_error.gamma
       << " iters=" << std::setprecision(4) << rep.mean_iters;
    if (rep.mean_raw_bits > 0) os << " bits=" << std::setprecision(8) << rep.mean_raw_bits;
    if (rep.failures > 0) os << " failures=" << rep.failures;
    os << ';';
  }
  return os.str();
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const fs::path root(spec.output);
  fs::create_directories(root);

  ExperimentResult res;
  json points = json::array();
  json timing = json::array();
  for (const SweepPoint& p : expand_sweep(spec)) {
    MonteCarloOptions mc;
    mc.trials = spec.trials;
    mc.seed = spec.seed;
    mc.workers = opts.workers;
    mc.grid_points = spec.grid_points;
    PointResult pr{p, run_monte_carlo(p.config, p.algorithms, mc)};

    const fs::path dir = p.label.empty() ? root : root / point_dir(p);
    fs::create_directories(dir);
    write_file(dir / "roc.csv", [&](std::ostream& os) { write_roc_csv(os, pr.reports); });
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, pr.reports); });
    write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, pr.reports); });
    write_file(dir / "ledger.csv", [&](std::ostream& os) { write_ledger_csv(os, pr.reports); });

    json algs = json::array();
    json wall = json::object();
    for (const auto& r : pr.reports) {
      res.failures += r.failures;
      algs.push_back(report_json(r));
      wall[r.algorithm] = r.mean_wall_ms;
    }
    points.push_back({{"label", p.label}, {"value", p.value}, {"system", to_json(p.config)},
                      {"algorithms", std::move(algs)}});
    timing.push_back({{"label", p.label}, {"mean_wall_ms", std::move(wall)}});
    if (opts.log) *opts.log << digest(spec.name, pr) << std::endl;
    res.points.push_back(std::move(pr));
  }

  if (spec.sweep.axis != SweepAxis::None) {
    write_file(root / "sweep.csv", [&](std::ostream& os) {
      os << "axis,value,algorithm,equal_error_gamma,p_err,mean_iters,raw_bits,huffman_bits\n";
      for (const auto& pr : res.points) {
        for (const auto& r : pr.reports) {
          os << to_string(spec.sweep.axis) << ',' << pr.point.value << ',' << r.algorithm << ',';
          num(os, r.equal_error.gamma) << ',';
          num(os, r.equal_error.p_err) << ',';
          num(os, r.mean_iters) << ',';
          num(os, r.mean_raw_bits) << ',';
          num(os, r.mean_huffman_bits) << '\n';
        }
      }
    });
  }

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  json summary = {
      {"schema_version", kSchemaVersion},
      {"spec", to_json(spec)},
      {"points", std::move(points)},
      {"failures", res.failures},
      {"metadata", {{"generated_at", stamp.str()}, {"timing", std::move(timing)}}},
  };
  write_file(root / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  return res;
}

}  // namespace asyncact
