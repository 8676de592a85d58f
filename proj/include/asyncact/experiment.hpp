#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asyncact/eval.hpp"
#include "asyncact/model.hpp"

namespace asyncact {

inline constexpr int kSchemaVersion = 1;

enum class SweepAxis { None, T, M, TotalAntennas, Bits };

std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::None;
  std::vector<int> values;
  // T axis: keep L+T fixed at this value (L = len - T)
  std::optional<int> fixed_effective_len;
  // total_antennas axis: values are M, N = total / M
  int total_antennas = 0;
};

struct ExperimentSpec {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  SystemConfig system;
  std::vector<AlgorithmSpec> algorithms;
  SweepSpec sweep;
  int trials = 1;
  std::uint64_t seed = 1;
  std::string output = "out";
  int grid_points = 101;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// JSON text that failed to parse; line and column are 1-based.
class SpecParseError : public ConfigError {
 public:
  SpecParseError(const std::string& what, int line, int column)
      : ConfigError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// 1-based (line, column) of a byte offset in `text`.
std::pair<int, int> line_column(const std::string& text, std::size_t offset);

ExperimentSpec parse_spec(const nlohmann::json& j);
/// Parses JSON text; syntax errors throw SpecParseError.
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);

nlohmann::json to_json(const AlgorithmSpec& a);
nlohmann::json to_json(const ExperimentSpec& spec);

std::vector<std::string> preset_names();
/// fig1 | fig2a | fig2b | fig3 | fig4 | fig5 | bits; full scale (K=100, M=N=8).
ExperimentSpec preset(const std::string& name);

/// Shrinks K and the trial count by `scale` (at least 10 devices, 1 trial).
ExperimentSpec apply_scale(ExperimentSpec spec, double scale);

struct SweepPoint {
  std::string label;  // "" when there is no sweep, else e.g. "T=3"
  int value = 0;
  SystemConfig config;
  std::vector<AlgorithmSpec> algorithms;
};

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec);

struct PointResult {
  SweepPoint point;
  std::vector<DetectionReport> reports;
};

struct ExperimentResult {
  std::vector<PointResult> points;
  int failures = 0;  // failed (trial, algorithm) runs over all points
};

struct RunOptions {
  int workers = 0;
  std::ostream* log = nullptr;  // one digest line per sweep point
};

/// Runs every sweep point and writes roc.csv, summary.csv, trace.csv and
/// ledger.csv per point plus summary.json (and sweep.csv) under spec.output.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts);

void write_roc_csv(std::ostream& os, const std::vector<DetectionReport>& reports);
void write_summary_csv(std::ostream& os, const std::vector<DetectionReport>& reports);
void write_trace_csv(std::ostream& os, const std::vector<DetectionReport>& reports);
void write_ledger_csv(std::ostream& os, const std::vector<DetectionReport>& reports);

std::string digest(const std::string& name, const PointResult& r);

}  // namespace asyncact
