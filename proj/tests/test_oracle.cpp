#include <doctest.h>

#include "bundled.hpp"
#include "heg/oracle.hpp"

using namespace heg;
using heg::testing::vec;

TEST_CASE("grid enumeration order and endpoints") {
  const auto e2 = Manifoldd::euclidean(2);
  const Boxd b(e2, vec({0, 10}), vec({1, 12}));
  std::vector<Eigen::VectorXd> pts;
  for_each_grid_point(Grid::uniform(2, 3), b, [&](const Eigen::VectorXd& u) { pts.push_back(u); });
  REQUIRE(pts.size() == 9);
  CHECK(pts[0] == vec({0, 10}));
  CHECK(pts[1] == vec({0, 11}));
  CHECK(pts[2] == vec({0, 12}));
  CHECK(pts[3] == vec({0.5, 10}));
  CHECK(pts[8] == vec({1, 12}));

  const auto o1 = Manifoldd::positive_orthant(1);
  const Boxd bo(o1, vec({1}), vec({std::exp(2.0)}));
  std::vector<double> xs;
  for_each_grid_point(Grid::uniform(1, 3, GridSpace::Ambient), bo, [&](const Eigen::VectorXd& x) { xs.push_back(x[0]); });
  CHECK(xs.back() == std::exp(2.0));
  std::vector<double> us;
  for_each_grid_point(Grid::uniform(1, 3), bo, [&](const Eigen::VectorXd& x) { us.push_back(x[0]); });
  CHECK(us[1] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("grid budget and validation") {
  const auto e2 = Manifoldd::euclidean(2);
  const Boxd b(e2, vec({0, 0}), vec({1, 1}));
  Grid g = Grid::uniform(2, 1000);
  g.budget = 1e5;
  CHECK_THROWS_AS(for_each_grid_point(g, b, [](const Eigen::VectorXd&) {}), UsageError);
  CHECK_THROWS_AS(Grid::uniform(2, 1), UsageError);
  CHECK(Grid::with_spacing(b, 0.1).spacing(b) <= 0.1);
  CHECK(Grid::with_spacing(b, 0.1).counts[0] == 11);
}

TEST_CASE("grid_prox examples") {
  const auto ps = testing::bundled_prox_problems();
  const auto pr = ps[0].problem();
  const auto y = grid_prox(pr, Grid::with_spacing(pr.set, 1e-4));
  CHECK(std::abs(y[0] - 0.5) <= 1e-4);

  const auto z = ps[1].problem();
  const Grid g = Grid::with_spacing(z.set, 1e-3);
  CHECK(std::abs(grid_prox(z, g)[0] - 1.23456) <= 0.5e-3 + 1e-12);
}

TEST_CASE("certify_equilibrium examples") {
  const auto e1 = Manifoldd::euclidean(1);
  const Boxd b(e1, vec({-5}), vec({5}));
  const auto f = builtin("x_y_minus_x");
  const Grid g = Grid::uniform(1, 101);
  const auto ok = certify_equilibrium(f, b, Pointd(e1, vec({0})), g, 0.0);
  CHECK(ok.certified);
  CHECK(ok.worst_value == 0.0);

  const auto bad = certify_equilibrium(f, b, Pointd(e1, vec({1})), g, 1e-3);
  CHECK_FALSE(bad.certified);
  CHECK(bad.worst_y[0] == -5.0);
  CHECK(bad.worst_value == doctest::Approx(-6.0));
}

TEST_CASE("fd_gradient") {
  const auto e2 = Manifoldd::euclidean(2);
  const Pointd x(e2, vec({0.1, 0.2})), y(e2, vec({-0.3, 0.5}));
  CHECK(fd_gradient(builtin("zero", 2), x, y, 1e-3).norm() == 0.0);
  CHECK_THROWS_AS(fd_gradient(builtin("zero", 2), x, y, 0.0), UsageError);

  // Second order: halving the step cuts the error about four times.
  const auto o1 = Manifoldd::positive_orthant(1);
  const auto f = make_linear_bifunction(
      {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 1.0), vec({-3})});
  const Pointd xo(o1, vec({1.3})), yo(o1, vec({2.1}));
  const double exact = grad_second(f, xo, yo)[0];
  const double e1 = std::abs(fd_gradient(f, xo, yo, 1e-2)[0] - exact);
  const double e2h = std::abs(fd_gradient(f, xo, yo, 5e-3)[0] - exact);
  CHECK(e1 / e2h == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("solver agrees with the grid oracle on every bundled problem") {
  for (const auto& p : testing::bundled_prox_problems()) {
    const auto pr = p.problem();
    const double spacing = p.manifold->dim() == 1 ? 1e-3 : 1e-2;
    const Grid g = Grid::with_spacing(pr.set, spacing);
    ProxConfig cfg;
    cfg.multi_starts = default_multi_starts(*p.manifold);
    const auto sol = solve(pr, cfg);
    INFO(p.name);
    CHECK(distance(sol.y, grid_prox(pr, g)) <= 2 * g.spacing(pr.set));
  }
}
