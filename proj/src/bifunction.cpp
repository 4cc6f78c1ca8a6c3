#include "heg/bifunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace heg {

double evaluate(const Bifunction& f, const Pointd& x, const Pointd& y) {
  if (x.dim() != f.dim() || y.dim() != f.dim()) throw UsageError("bifunction dimension mismatch");
  return f(x.coords(), y.coords());
}

Eigen::VectorXd grad_second(const Bifunction& f, const Pointd& x, const Pointd& y) {
  if (x.dim() != f.dim() || y.dim() != f.dim()) throw UsageError("bifunction dimension mismatch");
  return (f.ambient_gradient(x.coords(), y.coords()).array() *
          y.manifold().chart_jacobian(y.coords()).array())
      .matrix();
}

void validate(const LinearBifunctionData& data) {
  const auto n = data.q.size();
  if (n == 0) throw UsageError("linear bifunction needs a nonempty q");
  if (data.C.rows() != n || data.C.cols() != n || data.D.rows() != n || data.D.cols() != n)
    throw UsageError("linear bifunction matrices must be n x n with n = size(q)");
  if (!data.C.allFinite() || !data.D.allFinite() || !data.q.allFinite())
    throw UsageError("linear bifunction data must be finite");
}

LinearStructure analyze(const LinearBifunctionData& data, double tol) {
  validate(data);
  LinearStructure s;
  s.d_symmetric = (data.D - data.D.transpose()).cwiseAbs().maxCoeff() <= tol;
  const Eigen::MatrixXd d_sym = 0.5 * (data.D + data.D.transpose());
  s.d_psd = s.d_symmetric && Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d_sym).eigenvalues().minCoeff() >= -tol;

  const Eigen::MatrixXd m = data.D - data.C;
  s.d_minus_c_symmetric = (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues();
  s.min_eigenvalue = ev.minCoeff();
  s.max_eigenvalue = ev.maxCoeff();
  s.monotone_part_nsd = s.max_eigenvalue <= tol;
  s.monotone_part_nd = s.max_eigenvalue < -tol;
  return s;
}

Bifunction make_linear_bifunction(LinearBifunctionData data, std::string name) {
  validate(data);
  const auto n = data.q.size();
  auto shared = std::make_shared<const LinearBifunctionData>(std::move(data));
  auto value = [shared](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto& d = *shared;
    return (d.C * x + d.D * y + d.q).dot(y - x);
  };
  // d/dy <Cx + Dy + q, y - x> = Cx + Dy + q + D^T (y - x)
  auto gradient = [shared](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::VectorXd {
    const auto& d = *shared;
    return d.C * x + d.D * y + d.q + d.D.transpose() * (y - x);
  };
  return {std::move(name), n, std::move(value), std::move(gradient)};
}

void validate(const NashCournotModel& model) {
  const auto n = model.a.size();
  if (n == 0) throw UsageError("Nash-Cournot model needs at least one firm");
  if (model.b.size() != n || model.alpha.size() != n || model.beta.size() != n)
    throw UsageError("Nash-Cournot arrays a, b, alpha, beta must have equal length");
  if ((model.b.array() < 0.0).any()) throw UsageError("Nash-Cournot price slopes b must be >= 0");
}

LinearBifunctionData build_nash_cournot(const NashCournotModel& model) {
  validate(model);
  const auto n = model.a.size();
  LinearBifunctionData out;
  out.D = model.b.asDiagonal();
  // Row i of the cross-effect matrix is b_i everywhere, so diag(b) + B has
  // every entry of row i equal to b_i.
  out.C = model.b.replicate(1, n);
  out.q = model.alpha - model.a;
  return out;
}

NashCournotModel table1_model() {
  NashCournotModel m;
  m.a = Eigen::Vector4d(100.0, 110.0, 100.0, 115.0);
  m.b = Eigen::Vector4d(0.01, 0.02, 0.015, 0.05);
  m.alpha = Eigen::Vector4d(20.0, 15.0, 17.0, 20.0);
  m.beta = Eigen::Vector4d(0.0, 100.0, 0.0, 75.0);
  return m;
}

Boxd table1_bounds(ManifoldPtr<double> manifold) {
  return {std::move(manifold), Eigen::Vector4d(1000.0, 500.0, 800.0, 500.0),
          Eigen::Vector4d(2000.0, 2500.0, 1500.0, 3000.0)};
}

Eigen::VectorXd table1_start() { return Eigen::Vector4d(1000.0, 500.0, 800.0, 500.0); }

Bifunction builtin(const std::string& name, Eigen::Index dim) {
  if (name == "x_y_minus_x") {
    if (dim != 1) throw UsageError("builtin 'x_y_minus_x' is one-dimensional");
    return {name, 1,
            [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x[0] * (y[0] - x[0]); },
            [](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd { return x; }};
  }
  if (name == "y_minus_x") {
    return {name, dim,
            [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return (y - x).sum(); },
            [dim](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::VectorXd {
              return Eigen::VectorXd::Ones(dim);
            }};
  }
  if (name == "zero") {
    return {name, dim, [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; },
            [dim](const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::VectorXd {
              return Eigen::VectorXd::Zero(dim);
            }};
  }
  throw UsageError("unknown builtin bifunction '" + name + "'");
}

namespace {

void require_match(const Bifunction& f, const Boxd& set) {
  if (f.dim() != set.dim()) throw UsageError("bifunction and feasible set dimensions differ");
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const Bifunction& f, const Boxd& set, std::size_t samples,
                                     std::uint64_t seed) {
  if (samples == 0) throw UsageError("estimate_lipschitz needs at least one sample");
  require_match(f, set);
  std::mt19937_64 rng(seed);
  const auto& m = set.manifold();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const auto x = set.sample(rng).coords();
    const auto y = set.sample(rng).coords();
    const auto z = set.sample(rng).coords();
    const double scale = m.squared_distance(x, y) + m.squared_distance(y, z);
    if (scale <= 0.0) continue;
    const double deficit = f(x, z) - f(x, y) - f(y, z);
    worst = std::max(worst, deficit / scale);
  }
  LipschitzEstimate est;
  est.max_violation_ratio = std::isfinite(worst) ? worst : 0.0;
  est.gamma1 = est.gamma2 = std::max(0.0, est.max_violation_ratio);
  est.samples = samples;
  est.seed = seed;
  return est;
}

double lipschitz_upper_bound(const LinearBifunctionData& data, const Boxd& set) {
  validate(data);
  if (data.q.size() != set.dim()) throw UsageError("linear data and feasible set dimensions differ");
  // f(x,y) + f(y,z) - f(x,z) = <(C - D)(y - x), z - y>, and on orthant
  // coordinates |y_i - x_i| <= upper_i |ln y_i - ln x_i|.
  const Eigen::VectorXd scale = set.manifold().log_mask().select(set.upper().array(), 1.0).matrix();
  const Eigen::MatrixXd m = scale.asDiagonal() * (data.C - data.D).cwiseAbs() * scale.asDiagonal();
  const double spectral = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
  return 0.5 * spectral;
}

MonotonicityReport classify_monotonicity(const Bifunction& f, const Boxd& set, std::size_t samples,
                                         std::uint64_t seed) {
  if (samples == 0) throw UsageError("classify_monotonicity needs at least one sample");
  require_match(f, set);
  std::mt19937_64 rng(seed);
  const auto& m = set.manifold();
  constexpr double inf = std::numeric_limits<double>::infinity();

  MonotonicityReport rep;
  rep.samples = samples;
  rep.seed = seed;
  double mono = inf, mono_e = inf, pseudo = inf, pseudo_e = inf;
  bool any_pseudo_pair = false;

  for (std::size_t k = 0; k < samples; ++k) {
    const auto x = set.sample(rng).coords();
    const auto y = set.sample(rng).coords();
    const double d2 = m.squared_distance(x, y);
    const double e2 = (x - y).squaredNorm();
    const double fxy = f(x, y);
    const double fyx = f(y, x);
    const double sum = fxy + fyx;
    if (sum > 0.0 && !rep.monotone.falsified) rep.monotone = {true, Witness{x, y}};
    if (d2 > 0.0) mono = std::min(mono, -sum / d2);
    if (e2 > 0.0) mono_e = std::min(mono_e, -sum / e2);

    // Both orderings of the pair are informative for pseudomonotonicity.
    for (const auto& [a, b, fab, fba] : {std::tuple{x, y, fxy, fyx}, std::tuple{y, x, fyx, fxy}}) {
      if (fab < 0.0) continue;
      if (fba > 0.0 && !rep.pseudomonotone.falsified) rep.pseudomonotone = {true, Witness{a, b}};
      if (d2 > 0.0) {
        any_pseudo_pair = true;
        pseudo = std::min(pseudo, -fba / d2);
        pseudo_e = std::min(pseudo_e, -fba / e2);
      }
    }
  }
  rep.strong_monotone_modulus = std::isfinite(mono) ? mono : 0.0;
  rep.strong_monotone_modulus_euclidean = std::isfinite(mono_e) ? mono_e : 0.0;
  if (any_pseudo_pair) {
    rep.strong_pseudomonotone_modulus = pseudo;
    rep.strong_pseudomonotone_modulus_euclidean = pseudo_e;
  }
  return rep;
}

PseudomonotoneAtReport check_pseudomonotone_at(const Bifunction& f, const Boxd& set,
                                               const Pointd& xbar, std::size_t samples,
                                               std::uint64_t seed) {
  if (samples == 0) throw UsageError("check_pseudomonotone_at needs at least one sample");
  require_match(f, set);
  std::mt19937_64 rng(seed);
  const auto& m = set.manifold();
  const auto& xb = xbar.coords();
  PseudomonotoneAtReport rep;
  rep.samples = samples;
  double rho = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const auto y = set.sample(rng).coords();
    if (f(xb, y) < 0.0) continue;
    const double fyx = f(y, xb);
    if (fyx > 0.0 && !rep.verdict.falsified) rep.verdict = {true, Witness{xb, y}};
    const double d2 = m.squared_distance(xb, y);
    if (d2 > 0.0) rho = std::min(rho, -fyx / d2);
  }
  if (std::isfinite(rho)) rep.modulus = rho;
  return rep;
}

}  // namespace heg
