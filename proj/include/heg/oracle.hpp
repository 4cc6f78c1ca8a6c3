#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "heg/bifunction.hpp"
#include "heg/feasible.hpp"
#include "heg/prox.hpp"

namespace heg {

// Brute-force verifiers. Nothing here shares code with the prox solver or the
// extragradient driver beyond evaluating the bifunction itself.

enum class GridSpace { Chart, Ambient };

struct Grid {
  std::vector<Eigen::Index> counts;  // samples per coordinate, each >= 2
  GridSpace space = GridSpace::Chart;
  double budget = 1e7;  // maximum number of grid points

  /// Same count on every axis.
  static Grid uniform(Eigen::Index dim, Eigen::Index points_per_axis, GridSpace space = GridSpace::Chart);
  /// Enough points per axis that neighbouring samples are at most `spacing` apart.
  static Grid with_spacing(const Boxd& set, double spacing, GridSpace space = GridSpace::Chart);

  double total_points() const;
  /// Largest gap between neighbouring samples along any axis, in the grid's own coordinates.
  double spacing(const Boxd& set) const;
};

/// Calls visit(point) for every grid point in lexicographic index order
/// (last coordinate fastest). Throws UsageError if the grid exceeds its budget.
void for_each_grid_point(const Grid& grid, const Boxd& set,
                         const std::function<void(const Eigen::VectorXd&)>& visit);

/// Exhaustive argmin of f(base, y) + d^2(anchor, y) / (2 stepsize) over the grid.
Pointd grid_prox(const ProxProblem& problem, const Grid& grid);

struct Certificate {
  bool certified = false;
  Eigen::VectorXd worst_y;
  double worst_value = 0.0;
};

/// certified iff min over grid points y of f(x*, y) >= -slack.
Certificate certify_equilibrium(const Bifunction& f, const Boxd& set, const Pointd& xstar,
                                const Grid& grid, double slack);

/// Central differences of u -> f(x, from_chart(u)) at u = to_chart(y).
Eigen::VectorXd fd_gradient(const Bifunction& f, const Pointd& x, const Pointd& y, double step);

}  // namespace heg
