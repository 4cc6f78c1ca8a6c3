// heg: run, certify and replay extragradient experiments on flat Hadamard manifolds.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 certification or replay failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "heg/config.hpp"
#include "heg/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;
constexpr int kCheckFailure = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit extragradient solver for equilibrium problems on flat Hadamard manifolds"};
  app.require_subcommand(1);

  std::string out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;

  auto* run_cmd = app.add_subcommand("run", "Run the (lambda0, mu) sweep described by a config");
  std::string config_path;
  run_cmd->add_option("config", config_path, "Experiment configuration (JSON)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run_cmd->add_option("--jobs", jobs, "Concurrent sweep runs")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_flag("--no-timing", no_timing, "Write elapsed_s as 0 so traces are byte-stable");

  auto* cert_cmd = app.add_subcommand("certify", "Grid-certify the final point of a run summary");
  std::string summary_path;
  Eigen::Index points = 21;
  double slack = 1e-3;
  double budget = 1e7;
  cert_cmd->add_option("summary", summary_path, "Run summary JSON")->required();
  cert_cmd->add_option("--points", points, "Grid points per axis (chart coordinates)")->check(CLI::Range(2, 100000));
  cert_cmd->add_option("--slack", slack, "Allowed negativity of min_y f(x*, y)");
  cert_cmd->add_option("--budget", budget, "Maximum number of grid points");

  auto* replay_cmd = app.add_subcommand("replay", "Re-run a config and compare against a trace");
  std::string trace_path, replay_config;
  replay_cmd->add_option("trace", trace_path, "Trace CSV written by 'run'")->required();
  replay_cmd->add_option("config", replay_config, "Configuration the trace was produced from")->required();
  replay_cmd->add_option("--seed", seed, "Override the config seed");

  auto* print_cmd = app.add_subcommand("print-config", "Print the bundled configuration with all defaults");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      heg::RunConfig cfg;
      try {
        cfg = heg::load_config(config_path);
      } catch (const heg::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kConfigError;
      }
      heg::ExperimentOptions opts;
      opts.out_dir = out_dir;
      opts.jobs = jobs;
      opts.seed = seed;
      opts.timing = !no_timing;
      const auto res = heg::run_experiment(cfg, opts);
      for (const auto& r : res.runs)
        std::cout << r.trace_file << "  lambda0=" << r.lambda0 << " mu=" << r.mu << "  " << heg::to_string(r.status)
                  << " after " << r.iterations << " iterations, eps=" << r.final_eps << "\n";
      std::cout << "manifest: " << res.manifest.string() << "\n";
      return res.any_aborted ? kSolverFailure : kOk;
    }

    if (*cert_cmd) {
      std::ifstream in(summary_path);
      if (!in) {
        std::cerr << "cannot read " << summary_path << "\n";
        return kConfigError;
      }
      nlohmann::json summary;
      try {
        summary = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << summary_path << ": " << e.what() << "\n";
        return kConfigError;
      }
      const auto c = heg::certify_summary(summary, points, slack, budget);
      std::cout << (c.certified ? "certified" : "NOT certified") << ": min f(x*, y) = " << c.worst_value
                << " over " << c.grid_points << " grid points (slack " << slack << ")\n";
      if (!c.certified) {
        std::cout << "worst y:";
        for (Eigen::Index i = 0; i < c.worst_y.size(); ++i) std::cout << ' ' << c.worst_y[i];
        std::cout << "\n";
      }
      return c.certified ? kOk : kCheckFailure;
    }

    if (*replay_cmd) {
      heg::RunConfig cfg;
      try {
        cfg = heg::load_config(replay_config);
      } catch (const heg::ConfigError& e) {
        std::cerr << replay_config << ": " << e.what() << "\n";
        return kConfigError;
      }
      const auto out = heg::replay_check(trace_path, cfg, seed);
      std::cout << (out.identical ? "identical" : "MISMATCH") << ": " << out.message << "\n";
      return out.identical ? kOk : kCheckFailure;
    }

    if (*print_cmd) {
      std::cout << heg::to_json(heg::default_config()).dump(2) << "\n";
      return kOk;
    }
  } catch (const heg::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const heg::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}
