#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heg/bifunction.hpp"
#include "heg/feasible.hpp"
#include "heg/prox.hpp"

namespace heg {

struct SolverConfig {
  double lambda0 = 1.0;
  double mu = 0.5;         // in (0, 1)
  double stop_tol = 1e-6;  // stop once d(x_n, y_n) <= stop_tol
  int max_outer = 500;
  ProxConfig inner;
  /// Seed for the random prox starts; each prox call derives its own stream.
  std::uint64_t seed = 0;
};

void validate(const SolverConfig& cfg);

struct IterationRecord {
  int n = 0;
  Pointd x;
  Pointd y;
  Pointd x_next;
  double lambda = 0.0;       // lambda_n used by both prox steps
  double lambda_next = 0.0;  // lambda_{n+1}
  double eps = 0.0;          // d(x_n, y_n)
  double denominator = 0.0;  // f(x_n, x_{n+1}) - f(x_n, y_n) - f(y_n, x_{n+1})
  double elapsed = 0.0;      // seconds since the start of the run, after this iteration
  int inner_iters_y = 0;
  int inner_iters_x = 0;
  bool inner_converged = true;
};

struct Trace {
  std::vector<IterationRecord> records;
};

enum class RunStatus { Converged, MaxIterations, Aborted };

std::string to_string(RunStatus status);

struct RunResult {
  Trace trace;
  Pointd final_x;
  RunStatus status = RunStatus::MaxIterations;
  std::string message;
};

/// Raised when the bifunction produces a non-finite value mid-run.
class SolverAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepResult {
  Pointd x_next;
  double lambda_next;
  IterationRecord record;
};

/// lambda_{n+1} = min{lambda_n, mu (a + b) / (2 denominator)}, keeping lambda_n
/// when the denominator is not positive.
double next_stepsize(double lambda, double mu, double d2_xy, double d2_x1y, double denominator);

/// One extragradient iteration from (x_n, lambda_n).
StepResult step(const Bifunction& f, const Boxd& set, const Pointd& x, double lambda,
                const SolverConfig& cfg, int n = 0);

RunResult run(const Bifunction& f, const Boxd& set, const Pointd& x0, const SolverConfig& cfg);

/// d^2(x_{n+1}, xbar) - d^2(x_n, xbar) + (1 - mu lambda_n / lambda_{n+1}) (d^2(x_n, y_n) + d^2(x_{n+1}, y_n)).
/// Non-positive when the Fejer-type descent inequality holds for this iteration.
double fejer_certificate_excess(const IterationRecord& rec, const Pointd& reference, double mu);

struct RateOptions {
  double fit_floor = 1e-20;   // squared distances at or below this are left out of the fit
  double min_fit_r2 = 0.9;    // coefficient of determination required for a reported r
  std::size_t min_points = 5;
  double fejer_slack = 1e-12;
  std::optional<double> gamma;  // Lipschitz-type constant for the stepsize floor check
  std::optional<double> mu;
  std::optional<double> lambda0;
};

struct RateReport {
  std::optional<int> fejer_monotone_after;  // n0, empty means never
  std::optional<double> r;
  /// Smallest M with d^2(x_n, xbar) <= M r^n over the fitted range.
  double M = 0.0;
  double log_intercept = 0.0;
  double fit_rms = 0.0;
  double fit_r2 = 0.0;
  std::size_t fit_points = 0;
  double fitted_slope = 0.0;  // log r from least squares, reported even when r is withheld
  /// First index after which the margin 1 - mu lambda_n / lambda_{n+1} stays
  /// positive, and the smallest margin from there on.
  std::optional<int> kappa_from;
  double kappa = 0.0;
  bool kappa_margin_ok = false;
  bool lambda_nonincreasing = true;
  std::optional<bool> lambda_floor_ok;
  double lambda_limit = 0.0;
  std::vector<double> distances;  // d(x_n, xbar), n = 0..N, last entry from x_next
};

RateReport analyze_rate(const Trace& trace, const Pointd& reference, const RateOptions& opts = {});

}  // namespace heg
