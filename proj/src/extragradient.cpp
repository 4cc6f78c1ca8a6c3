#include "heg/extragradient.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace heg {

void validate(const SolverConfig& cfg) {
  if (!(cfg.lambda0 > 0.0) || !std::isfinite(cfg.lambda0)) throw UsageError("lambda0 must be positive");
  if (!(cfg.mu > 0.0 && cfg.mu < 1.0)) throw UsageError("mu must lie in (0, 1)");
  if (!(cfg.stop_tol >= 0.0)) throw UsageError("stop_tol must be >= 0");
  if (cfg.max_outer < 1) throw UsageError("max_outer must be >= 1");
  if (!(cfg.inner.tol > 0.0)) throw UsageError("inner tolerance must be positive");
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::Aborted: return "aborted";
  }
  return "unknown";
}

double next_stepsize(double lambda, double mu, double d2_xy, double d2_x1y, double denominator) {
  if (!(denominator > 0.0)) return lambda;
  return std::min(lambda, mu * (d2_xy + d2_x1y) / (2.0 * denominator));
}

namespace {

std::uint64_t prox_seed(std::uint64_t seed, int n, int which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(which)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

double finite_or_abort(double v, const char* what) {
  if (!std::isfinite(v)) throw SolverAbort(std::string("non-finite bifunction value in ") + what);
  return v;
}

}  // namespace

StepResult step(const Bifunction& f, const Boxd& set, const Pointd& x, double lambda,
                const SolverConfig& cfg, int n) {
  if (!(lambda > 0.0)) throw UsageError("stepsize must be positive");
  if (!set.contains(x, 1e-9)) throw UsageError("iterate is outside the feasible set");

  ProxConfig inner_y = cfg.inner;
  inner_y.seed = prox_seed(cfg.seed, n, 0);
  const ProxSolution py = solve(ProxProblem{f, set, x, x, lambda}, inner_y);

  ProxConfig inner_x = cfg.inner;
  inner_x.seed = prox_seed(cfg.seed, n, 1);
  const ProxSolution px = solve(ProxProblem{f, set, py.y, x, lambda}, inner_x);

  const auto& m = set.manifold();
  const auto& xc = x.coords();
  const auto& yc = py.y.coords();
  const auto& x1 = px.y.coords();
  const double d2_xy = m.squared_distance(xc, yc);
  const double d2_x1y = m.squared_distance(x1, yc);
  const double denom = finite_or_abort(f(xc, x1), "f(x_n, x_n+1)") -
                       finite_or_abort(f(xc, yc), "f(x_n, y_n)") -
                       finite_or_abort(f(yc, x1), "f(y_n, x_n+1)");
  const double lambda_next = next_stepsize(lambda, cfg.mu, d2_xy, d2_x1y, denom);

  IterationRecord rec{n,
                      x,
                      py.y,
                      px.y,
                      lambda,
                      lambda_next,
                      std::sqrt(d2_xy),
                      denom,
                      0.0,
                      py.iterations,
                      px.iterations,
                      py.converged && px.converged};
  return {px.y, lambda_next, std::move(rec)};
}

RunResult run(const Bifunction& f, const Boxd& set, const Pointd& x0, const SolverConfig& cfg) {
  validate(cfg);
  if (!set.contains(x0)) throw UsageError("starting point is outside the feasible set");

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  RunResult out{{}, x0, RunStatus::MaxIterations, {}};
  Pointd x = x0;
  double lambda = cfg.lambda0;
  for (int n = 0; n < cfg.max_outer; ++n) {
    std::optional<StepResult> s;
    try {
      s.emplace(step(f, set, x, lambda, cfg, n));
    } catch (const SolverAbort& e) {
      out.final_x = x;
      out.status = RunStatus::Aborted;
      out.message = e.what();
      return out;
    }
    s->record.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool stop = s->record.eps <= cfg.stop_tol;
    out.trace.records.push_back(std::move(s->record));
    if (stop) {
      out.final_x = x;
      out.status = RunStatus::Converged;
      return out;
    }
    x = std::move(s->x_next);
    lambda = s->lambda_next;
  }
  out.final_x = x;
  return out;
}

double fejer_certificate_excess(const IterationRecord& rec, const Pointd& reference, double mu) {
  const double margin = 1.0 - mu * rec.lambda / rec.lambda_next;
  return squared_distance(rec.x_next, reference) - squared_distance(rec.x, reference) +
         margin * (squared_distance(rec.x, rec.y) + squared_distance(rec.x_next, rec.y));
}

RateReport analyze_rate(const Trace& trace, const Pointd& reference, const RateOptions& opts) {
  if (trace.records.empty()) throw UsageError("analyze_rate needs a nonempty trace");
  const auto& recs = trace.records;
  RateReport rep;

  rep.distances.reserve(recs.size() + 1);
  for (const auto& r : recs) rep.distances.push_back(distance(r.x, reference));
  rep.distances.push_back(distance(recs.back().x_next, reference));
  const auto& d = rep.distances;
  const int last = static_cast<int>(d.size()) - 1;

  // Smallest n0 after which the distance never increases.
  int n0 = last;
  while (n0 > 0 && d[n0] <= d[n0 - 1] + opts.fejer_slack) --n0;
  rep.fejer_monotone_after = n0;

  std::vector<double> ns, logs;
  for (int n = n0; n <= last; ++n) {
    const double d2 = d[n] * d[n];
    if (d2 > opts.fit_floor) {
      ns.push_back(n);
      logs.push_back(std::log(d2));
    }
  }
  rep.fit_points = ns.size();
  if (ns.size() >= 2) {
    const Eigen::Index k = static_cast<Eigen::Index>(ns.size());
    Eigen::MatrixXd A(k, 2);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = ns[i];
      b[i] = logs[i];
    }
    const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
    rep.log_intercept = coef[0];
    rep.fitted_slope = coef[1];
    const double ss_res = (A * coef - b).squaredNorm();
    const double ss_tot = (b.array() - b.mean()).square().sum();
    rep.fit_rms = std::sqrt(ss_res / static_cast<double>(k));
    rep.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    const double r = std::exp(coef[1]);
    double log_m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) log_m = std::max(log_m, logs[i] - ns[i] * coef[1]);
    rep.M = std::exp(log_m);
    if (ns.size() >= opts.min_points && rep.fit_r2 >= opts.min_fit_r2 && r > 0.0 && r < 1.0) rep.r = r;
  }

  rep.lambda_limit = recs.back().lambda_next;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    if (r.lambda_next > r.lambda) rep.lambda_nonincreasing = false;
    if (i > 0 && r.lambda != recs[i - 1].lambda_next) rep.lambda_nonincreasing = false;
  }
  if (opts.mu) {
    auto margin = [&](const IterationRecord& r) { return 1.0 - *opts.mu * r.lambda / r.lambda_next; };
    int from = static_cast<int>(recs.size());
    while (from > 0 && margin(recs[from - 1]) > 0.0) --from;
    if (from < static_cast<int>(recs.size())) {
      rep.kappa_from = from;
      rep.kappa = std::numeric_limits<double>::infinity();
      for (std::size_t i = from; i < recs.size(); ++i) rep.kappa = std::min(rep.kappa, margin(recs[i]));
      rep.kappa_margin_ok = true;
    }
  }
  if (opts.gamma && opts.mu && opts.lambda0) {
    const double floor = *opts.gamma > 0.0 ? std::min(*opts.lambda0, *opts.mu / (2.0 * *opts.gamma))
                                           : *opts.lambda0;
    bool ok = true;
    for (const auto& r : recs) ok = ok && r.lambda >= floor - 1e-12 && r.lambda_next >= floor - 1e-12;
    rep.lambda_floor_ok = ok;
  }
  return rep;
}

}  // namespace heg
