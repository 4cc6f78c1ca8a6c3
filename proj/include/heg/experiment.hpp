#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heg/config.hpp"
#include "heg/extragradient.hpp"

namespace heg {

struct ExperimentOptions {
  std::filesystem::path out_dir;  // empty: use the config's output_dir
  int jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  bool timing = true;                 // false writes elapsed_s = 0 for byte-stable traces
};

/// Everything produced by one (lambda0, mu) run.
struct SingleRun {
  double lambda0 = 0.0;
  double mu = 0.0;
  RunResult result;
  std::optional<Pointd> reference;  // long high-precision run used for the rate analysis
  RunStatus reference_status = RunStatus::MaxIterations;
  std::optional<RateReport> rate;
  double gamma_bound = 0.0;  // Lipschitz-type constant used for the stepsize floor
  bool gamma_is_upper_bound = false;
};

SingleRun run_single(const RunConfig& cfg, const Problem& problem, double lambda0, double mu);

nlohmann::json summary_json(const RunConfig& cfg, const SingleRun& run);

struct RunArtifact {
  int index = 0;
  double lambda0 = 0.0;
  double mu = 0.0;
  RunStatus status = RunStatus::MaxIterations;
  std::string trace_file;
  std::string summary_file;
  std::string trace_sha256;
  std::string summary_sha256;
  int iterations = 0;
  double final_eps = 0.0;
  std::string message;
};

struct ExperimentResult {
  std::vector<RunArtifact> runs;
  std::filesystem::path manifest;
  bool any_aborted = false;
};

/// Runs the (lambda0, mu) sweep, writing run_NNN.csv / run_NNN.json per pair
/// and manifest.json once all runs finish.
ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentOptions& opts);

std::string sha256_hex(const std::string& bytes);

struct ReplayOutcome {
  bool identical = false;
  std::optional<double> lambda0, mu;  // the sweep pair the trace was matched against
  std::string message;
};

/// Re-runs the configuration and compares against the trace. The sweep pair
/// is taken from a manifest.json next to the trace when present; otherwise
/// every pair in the config's sweep is tried.
ReplayOutcome replay_check(const std::filesystem::path& trace_path, const RunConfig& cfg,
                           std::optional<std::uint64_t> seed = std::nullopt);

struct CertifyOutcome {
  bool certified = false;
  double worst_value = 0.0;
  Eigen::VectorXd worst_y;
  double grid_points = 0.0;
};

/// Certifies the final point of a run summary on a chart-space grid.
CertifyOutcome certify_summary(const nlohmann::json& summary, Eigen::Index points_per_axis, double slack,
                               double budget = 1e7);

}  // namespace heg
