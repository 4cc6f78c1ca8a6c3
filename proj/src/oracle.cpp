#include "heg/oracle.hpp"

#include <cmath>
#include <limits>

namespace heg {

Grid Grid::uniform(Eigen::Index dim, Eigen::Index points_per_axis, GridSpace space) {
  if (dim < 1 || points_per_axis < 2) throw UsageError("a grid needs dim >= 1 and >= 2 points per axis");
  return {std::vector<Eigen::Index>(static_cast<std::size_t>(dim), points_per_axis), space};
}

Grid Grid::with_spacing(const Boxd& set, double spacing, GridSpace space) {
  if (!(spacing > 0.0)) throw UsageError("grid spacing must be positive");
  const Eigen::VectorXd& lo = space == GridSpace::Chart ? set.chart_lower() : set.lower();
  const Eigen::VectorXd& hi = space == GridSpace::Chart ? set.chart_upper() : set.upper();
  Grid g;
  g.space = space;
  for (Eigen::Index i = 0; i < set.dim(); ++i) {
    // Rounding in the division must not add a spurious extra point.
    const double cells = std::ceil((hi[i] - lo[i]) / spacing - 1e-9);
    g.counts.push_back(std::max<Eigen::Index>(2, static_cast<Eigen::Index>(cells) + 1));
  }
  return g;
}

double Grid::total_points() const {
  double total = 1.0;
  for (auto c : counts) total *= static_cast<double>(c);
  return total;
}

double Grid::spacing(const Boxd& set) const {
  const Eigen::VectorXd& lo = space == GridSpace::Chart ? set.chart_lower() : set.lower();
  const Eigen::VectorXd& hi = space == GridSpace::Chart ? set.chart_upper() : set.upper();
  double h = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    h = std::max(h, (hi[static_cast<Eigen::Index>(i)] - lo[static_cast<Eigen::Index>(i)]) /
                        static_cast<double>(counts[i] - 1));
  return h;
}

void for_each_grid_point(const Grid& grid, const Boxd& set,
                         const std::function<void(const Eigen::VectorXd&)>& visit) {
  const auto n = set.dim();
  if (static_cast<Eigen::Index>(grid.counts.size()) != n) throw UsageError("grid dimension does not match set");
  for (auto c : grid.counts)
    if (c < 2) throw UsageError("grid needs at least 2 samples per coordinate");
  if (grid.total_points() > grid.budget) throw UsageError("grid exceeds its point budget");

  const bool chart = grid.space == GridSpace::Chart;
  const Eigen::VectorXd& lo = chart ? set.chart_lower() : set.lower();
  const Eigen::VectorXd& hi = chart ? set.chart_upper() : set.upper();
  const auto& m = set.manifold();

  // Per-axis sample values in ambient coordinates; endpoints are the exact bounds.
  std::vector<Eigen::VectorXd> axis(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = grid.counts[static_cast<std::size_t>(i)];
    Eigen::VectorXd v(c);
    for (Eigen::Index k = 0; k < c; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(c - 1);
      double s = lo[i] + t * (hi[i] - lo[i]);
      if (chart && m.log_mask()[i]) s = std::exp(s);
      v[k] = s;
    }
    v[0] = set.lower()[i];
    v[c - 1] = set.upper()[i];
    axis[static_cast<std::size_t>(i)] = std::move(v);
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = axis[static_cast<std::size_t>(i)][0];
  while (true) {
    visit(p);
    Eigen::Index i = n - 1;
    for (; i >= 0; --i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k < grid.counts[static_cast<std::size_t>(i)]) {
        p[i] = axis[static_cast<std::size_t>(i)][k];
        break;
      }
      k = 0;
      p[i] = axis[static_cast<std::size_t>(i)][0];
    }
    if (i < 0) return;
  }
}

Pointd grid_prox(const ProxProblem& problem, const Grid& grid) {
  if (!(problem.stepsize > 0.0)) throw UsageError("prox stepsize must be positive");
  const auto& m = problem.set.manifold();
  const Eigen::VectorXd& base = problem.base.coords();
  const Eigen::VectorXd& anchor = problem.anchor.coords();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd arg = anchor;
  for_each_grid_point(grid, problem.set, [&](const Eigen::VectorXd& y) {
    // Intrinsic distance, not the chart quadratic used by the solver.
    const double v = problem.f(base, y) + m.squared_distance(anchor, y) / (2.0 * problem.stepsize);
    if (v < best) {
      best = v;
      arg = y;
    }
  });
  return {problem.set.manifold_ptr(), arg};
}

Certificate certify_equilibrium(const Bifunction& f, const Boxd& set, const Pointd& xstar,
                                const Grid& grid, double slack) {
  if (!set.contains(xstar, 1e-9)) throw UsageError("candidate equilibrium is outside the feasible set");
  Certificate c;
  c.worst_value = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd& x = xstar.coords();
  for_each_grid_point(grid, set, [&](const Eigen::VectorXd& y) {
    const double v = f(x, y);
    if (v < c.worst_value) {
      c.worst_value = v;
      c.worst_y = y;
    }
  });
  c.certified = c.worst_value >= -slack;
  return c;
}

Eigen::VectorXd fd_gradient(const Bifunction& f, const Pointd& x, const Pointd& y, double step) {
  if (!(step > 0.0)) throw UsageError("finite-difference step must be positive");
  const auto& m = y.manifold();
  const Eigen::VectorXd u = m.to_chart(y.coords());
  Eigen::VectorXd g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    Eigen::VectorXd up = u, dn = u;
    up[i] += step;
    dn[i] -= step;
    g[i] = (f(x.coords(), m.from_chart(up)) - f(x.coords(), m.from_chart(dn))) / (2.0 * step);
  }
  return g;
}

}  // namespace heg
