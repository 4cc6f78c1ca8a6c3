#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "heg/bifunction.hpp"
#include "heg/feasible.hpp"

namespace heg {

/// argmin_{y in C} f(base, y) + 1/(2 stepsize) d^2(anchor, y).
///
/// The extragradient step solves this twice per iteration with the same
/// anchor x_n and base x_n (predictor) or y_n (corrector).
struct ProxProblem {
  const Bifunction& f;
  const Boxd& set;
  Pointd base;
  Pointd anchor;
  double stepsize;
};

struct ProxConfig {
  double tol = 1e-10;   // projected-gradient residual in chart coordinates
  int max_iters = 500;  // per start
  int multi_starts = 0; // random starts in addition to the anchor
  std::uint64_t seed = 0;
};

struct ProxSolution {
  Pointd y;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;  // summed over all starts
  bool converged = false;
  int starts_used = 0;
};

/// Chart-space objective g(u) = stepsize * f(base, from_chart(u)) + 1/2 ||u - to_chart(anchor)||^2.
/// Same minimizer as the prox objective scaled by the stepsize.
double prox_objective(const ProxProblem& problem, const Eigen::VectorXd& u);
Eigen::VectorXd prox_gradient(const ProxProblem& problem, const Eigen::VectorXd& u);

/// ||u - P(u - grad g(u))|| at u = to_chart(y); zero iff y is first-order optimal.
double residual(const ProxProblem& problem, const Pointd& y);

/// Projected gradient with Armijo backtracking and Barzilai-Borwein initial
/// steps, started from the anchor and `multi_starts` seeded random points.
/// Returns the best start by objective (ties go to the lowest start index).
ProxSolution solve(const ProxProblem& problem, const ProxConfig& cfg);

/// Recommended number of random starts: chart composition can make the
/// subproblem nonconvex on orthant coordinates.
int default_multi_starts(const Manifoldd& manifold);

}  // namespace heg
