#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heg/bifunction.hpp"
#include "heg/extragradient.hpp"
#include "heg/manifold.hpp"

namespace heg {

/// Invalid experiment configuration; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ProblemSpec {
  std::string kind;  // nash_cournot | linear | builtin_1d
  NashCournotModel nash;
  LinearBifunctionData linear;
  std::string builtin_name;
};

struct RunConfig {
  std::vector<Component> manifold;
  ProblemSpec problem;
  Eigen::VectorXd lower, upper;
  Eigen::VectorXd x0;
  std::vector<double> lambda0s;
  std::vector<double> mus;
  bool default_sweep = false;  // sweep lists were not given and the stand-in was used
  double stop_tol = 1e-6;
  int max_outer = 500;
  double inner_tol = 1e-10;
  int inner_max_iters = 500;
  std::optional<int> inner_multi_starts;  // empty: pick from the manifold
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  double reference_tol = 1e-11;  // stop_tol of the run that produces the rate reference
  int reference_max_outer = 5000;
};

inline const std::vector<double> kDefaultLambda0s{0.1, 0.5, 1.0};
inline const std::vector<double> kDefaultMus{0.3, 0.5, 0.7};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Full configuration with every default written out.
nlohmann::json to_json(const RunConfig& cfg);
/// The bundled four-firm experiment, used by `print-config`.
RunConfig default_config();

struct Problem {
  ManifoldPtr<double> manifold;
  Boxd set;
  Bifunction f;
  std::optional<LinearBifunctionData> linear;
  Pointd x0;
};

Problem build_problem(const RunConfig& cfg);
SolverConfig solver_config(const RunConfig& cfg, const Problem& problem, double lambda0, double mu);
/// Long run toward the limit point; the inner tolerance is tightened below reference_tol.
SolverConfig reference_solver_config(const RunConfig& cfg, const Problem& problem, double lambda0, double mu);

}  // namespace heg
