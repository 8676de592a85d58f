// asyncact: run detection experiments from a JSON spec or a built-in preset.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asyncact/experiment.hpp"

namespace {

constexpr int kExitSpecError = 2;
constexpr int kExitPartial = 3;

struct Overrides {
  std::optional<double> scale;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scale", o.scale, "shrink K and the trial count by this factor")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trials", o.trials, "number of Monte-Carlo trials")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--workers", o.workers, "worker threads (default: ASYNCACT_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
}

int workers_from_env() {
  const char* env = std::getenv("ASYNCACT_WORKERS");
  if (!env || !*env) return 0;
  try {
    const int w = std::stoi(env);
    return w > 0 ? w : 0;
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring ASYNCACT_WORKERS='" << env << "'\n";
    return 0;
  }
}

int run(asyncact::ExperimentSpec spec, const Overrides& o) {
  if (o.scale) spec = asyncact::apply_scale(std::move(spec), *o.scale);
  if (o.trials) spec.trials = *o.trials;
  if (o.seed) spec.seed = *o.seed;
  if (o.out) spec.output = *o.out;
  spec.validate();

  asyncact::RunOptions ro;
  ro.workers = o.workers ? *o.workers : workers_from_env();
  ro.log = &std::cout;
  const auto res = asyncact::run_experiment(spec, ro);
  if (res.failures > 0) {
    std::cerr << "error: " << res.failures << " solver run(s) failed; outputs in " << spec.output
              << '\n';
    return kExitPartial;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous activity detection simulator"};
  app.require_subcommand(1);

  Overrides run_o, preset_o;
  std::string spec_path;
  auto* run_cmd = app.add_subcommand("run", "run an experiment spec (JSON)");
  run_cmd->add_option("--spec", spec_path, "spec file")->required();
  add_overrides(run_cmd, run_o);

  std::string preset_name;
  bool dump = false;
  auto* preset_cmd = app.add_subcommand("preset", "run a built-in experiment");
  preset_cmd->add_option("name", preset_name, "fig1|fig2a|fig2b|fig3|fig4|fig5|bits")->required();
  preset_cmd->add_flag("--dump", dump, "print the preset spec as JSON and exit");
  add_overrides(preset_cmd, preset_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(asyncact::load_spec(spec_path), run_o);
    asyncact::ExperimentSpec spec = asyncact::preset(preset_name);
    if (dump) {
      std::cout << asyncact::to_json(spec).dump(2) << '\n';
      return 0;
    }
    return run(std::move(spec), preset_o);
  } catch (const asyncact::SpecParseError& e) {
    std::cerr << spec_path << ':' << e.line() << ':' << e.column() << ": " << e.what() << '\n';
    return kExitSpecError;
  } catch (const asyncact::ConfigError& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return kExitSpecError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
