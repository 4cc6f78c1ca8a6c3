#include "heg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace heg {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kStepMin = 1e-8;
constexpr double kStepMax = 1e8;
constexpr int kMaxBacktracks = 80;

void check(const ProxProblem& p) {
  if (!(p.stepsize > 0.0) || !std::isfinite(p.stepsize)) throw UsageError("prox stepsize must be positive");
  if (p.f.dim() != p.set.dim() || p.anchor.dim() != p.set.dim() || p.base.dim() != p.set.dim())
    throw UsageError("prox problem dimension mismatch");
}

struct StartResult {
  Eigen::VectorXd u;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

double projected_residual(const Boxd& set, const Eigen::VectorXd& u, const Eigen::VectorXd& grad) {
  return (u - set.project_chart(u - grad)).norm();
}

// Objective values at the rounding floor: |a - b| is indistinguishable from
// noise once it drops below a few ulps of the operands.
bool within_rounding(double a, double b) {
  return std::abs(a - b) <= 16.0 * std::numeric_limits<double>::epsilon() *
                                std::max({1e-300, std::abs(a), std::abs(b)});
}

// Evaluation error of g at u, estimated from the magnitudes that cancel in it:
// the terms of stepsize * f (proxied by the bifunction part of the gradient)
// and the products in 1/2 ||u - u_anchor||^2.
double objective_noise(const Eigen::VectorXd& u, const Eigen::VectorXd& u_anchor, const Eigen::VectorXd& grad,
                       double g) {
  const Eigen::VectorXd diff = u - u_anchor;
  const double f_part = (grad - diff).lpNorm<1>();
  const double q_part = u.cwiseAbs().cwiseMax(u_anchor.cwiseAbs()).dot(diff.cwiseAbs());
  return 32.0 * std::numeric_limits<double>::epsilon() * (f_part + q_part + std::abs(g));
}

StartResult descend(const ProxProblem& p, Eigen::VectorXd u, const ProxConfig& cfg) {
  u = p.set.project_chart(u);
  StartResult r;
  double g = prox_objective(p, u);
  Eigen::VectorXd grad = prox_gradient(p, u);
  if (!std::isfinite(g) || !grad.allFinite()) {
    r.u = u;
    r.objective = std::numeric_limits<double>::infinity();
    r.residual = std::numeric_limits<double>::infinity();
    return r;
  }
  const Eigen::VectorXd u_anchor = p.set.manifold().to_chart(p.anchor.coords());
  double step = 1.0;  // the quadratic term alone has unit curvature
  double res = projected_residual(p.set, u, grad);

  while (r.iterations < cfg.max_iters) {
    if (res <= cfg.tol) {
      r.converged = true;
      break;
    }
    ++r.iterations;

    const double noise = objective_noise(u, u_anchor, grad, g);
    double t = step;
    bool accepted = false;
    Eigen::VectorXd u_new;
    double g_new = 0.0;
    Eigen::VectorXd grad_new;
    double res_new = 0.0;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= kShrink) {
      u_new = p.set.project_chart(u - t * grad);
      g_new = prox_objective(p, u_new);
      if (!std::isfinite(g_new)) continue;
      if (g_new <= g + kArmijo * grad.dot(u_new - u)) {
        accepted = true;
        break;
      }
      // Near the minimizer the Armijo decrease falls below the evaluation
      // noise of g; accept a step that stays within the noise only if it
      // shrinks the residual.
      if (g_new <= g + noise) {
        grad_new = prox_gradient(p, u_new);
        res_new = projected_residual(p.set, u_new, grad_new);
        if (res_new < res) {
          accepted = true;
          break;
        }
        grad_new.resize(0);
      }
    }
    if (!accepted) break;  // stagnated

    if (grad_new.size() == 0) {
      grad_new = prox_gradient(p, u_new);
      res_new = projected_residual(p.set, u_new, grad_new);
    }
    const Eigen::VectorXd s = u_new - u;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kStepMin, kStepMax) : kStepMax;

    u = std::move(u_new);
    g = g_new;
    grad = std::move(grad_new);
    res = res_new;
  }
  r.converged = r.converged || res <= cfg.tol;
  r.u = std::move(u);
  r.objective = g;
  r.residual = res;
  return r;
}

}  // namespace

double prox_objective(const ProxProblem& p, const Eigen::VectorXd& u) {
  const auto& m = p.set.manifold();
  const Eigen::VectorXd y = m.from_chart(u);
  return p.stepsize * p.f(p.base.coords(), y) + 0.5 * (u - m.to_chart(p.anchor.coords())).squaredNorm();
}

Eigen::VectorXd prox_gradient(const ProxProblem& p, const Eigen::VectorXd& u) {
  const auto& m = p.set.manifold();
  const Eigen::VectorXd y = m.from_chart(u);
  const Eigen::VectorXd chart_grad =
      (p.f.ambient_gradient(p.base.coords(), y).array() * m.chart_jacobian(y).array()).matrix();
  return p.stepsize * chart_grad + (u - m.to_chart(p.anchor.coords()));
}

double residual(const ProxProblem& p, const Pointd& y) {
  check(p);
  const Eigen::VectorXd u = p.set.manifold().to_chart(y.coords());
  return projected_residual(p.set, u, prox_gradient(p, u));
}

ProxSolution solve(const ProxProblem& p, const ProxConfig& cfg) {
  check(p);
  if (!(cfg.tol > 0.0)) throw UsageError("prox tolerance must be positive");
  if (cfg.max_iters < 0 || cfg.multi_starts < 0) throw UsageError("prox iteration counts must be >= 0");

  const auto& m = p.set.manifold();
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(static_cast<std::size_t>(cfg.multi_starts) + 1);
  starts.push_back(m.to_chart(p.anchor.coords()));
  std::mt19937_64 rng(cfg.seed);
  for (int k = 0; k < cfg.multi_starts; ++k) starts.push_back(p.set.sample_chart(rng));

  StartResult best;
  best.objective = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  bool have_best = false;
  for (const auto& start : starts) {
    StartResult r = descend(p, start, cfg);
    total_iters += r.iterations;
    // Objectives equal up to rounding count as ties; the earlier start wins.
    if (!have_best || (r.objective < best.objective && !within_rounding(r.objective, best.objective))) {
      best = std::move(r);
      have_best = true;
    }
  }

  ProxSolution sol{Pointd(p.set.manifold_ptr(),
                          m.from_chart(best.u).cwiseMax(p.set.lower()).cwiseMin(p.set.upper())),
                   best.objective,
                   best.residual,
                   total_iters,
                   best.converged,
                   static_cast<int>(starts.size())};
  return sol;
}

int default_multi_starts(const Manifoldd& manifold) { return manifold.has_orthant() ? 4 : 0; }

}  // namespace heg
