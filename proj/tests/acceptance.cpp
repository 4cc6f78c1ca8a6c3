// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Usage: acceptance <configs-dir>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "bundled.hpp"
#include "profit_oracle.hpp"
#include "heg/config.hpp"
#include "heg/experiment.hpp"
#include "heg/oracle.hpp"

using namespace heg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& title, double time_limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (time_limit_s > 0) {
    std::ostringstream t;
    t << "runtime " << secs << " s exceeds " << time_limit_s << " s";
    out.require(secs < time_limit_s, t.str());
  }
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " [" << secs << " s] "
            << out.detail.str() << std::endl;
}

std::vector<ManifoldPtr<double>> manifold_kinds() {
  return {Manifoldd::euclidean(3), Manifoldd::positive_orthant(3),
          Manifoldd::make({{ComponentKind::Euclidean, 2}, {ComponentKind::LogPositiveOrthant, 2}})};
}

Pointd random_point(const ManifoldPtr<double>& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Eigen::VectorXd x(m->dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = m->log_mask()[i] ? std::exp(u(rng)) : 5.0 * u(rng) / 3.0;
  return {m, x};
}

Tangentd random_tangent(const Pointd& x, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd w(x.dim());
  for (auto& c : w) c = g(rng);
  return {x, x.manifold().push_forward(x.coords(), w)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Hieu-Quy-Vy extragradient in flat space for f(x,y) = <Cx + Dy + q, y - x>
// with diagonal D on a box, where both prox steps have the closed form
// y_i = clamp((x_i - lambda ((C - D) z + q)_i) / (1 + 2 lambda D_ii)).
struct FlatIterate {
  Eigen::VectorXd x;
  double lambda;
};

std::vector<FlatIterate> flat_extragradient(const LinearBifunctionData& d, const Eigen::VectorXd& lo,
                                            const Eigen::VectorXd& hi, Eigen::VectorXd x, double lambda, double mu,
                                            int iterations) {
  const Eigen::MatrixXd CmD = d.C - d.D;
  auto f = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (d.C * a + d.D * b + d.q).dot(b - a); };
  auto prox = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& anchor, double l) {
    Eigen::VectorXd y = anchor - l * (CmD * z + d.q);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::clamp(y[i] / (1 + 2 * l * d.D(i, i)), lo[i], hi[i]);
    return y;
  };
  std::vector<FlatIterate> out;
  for (int n = 0; n < iterations; ++n) {
    out.push_back({x, lambda});
    const Eigen::VectorXd y = prox(x, x, lambda);
    const Eigen::VectorXd x1 = prox(y, x, lambda);
    const double denom = f(x, x1) - f(x, y) - f(y, x1);
    if (denom > 0) lambda = std::min(lambda, mu * ((x - y).squaredNorm() + (x1 - y).squaredNorm()) / (2 * denom));
    x = x1;
  }
  return out;
}

struct RecordedRun {
  std::string label;
  RunResult result;
  SolverConfig cfg;
  double gamma;
  std::optional<Pointd> certified_reference;
};

// Runs every sweep pair of a bundled config, plus a long reference run
// whose limit is certified on a grid before it is used.
std::vector<RecordedRun> record_runs(const fs::path& cfg_path, Eigen::Index grid_points, double slack, Outcome& out) {
  const RunConfig cfg = load_config(cfg_path);
  const Problem p = build_problem(cfg);
  const LipschitzEstimate est = estimate_lipschitz(p.f, p.set, 100000, 7);
  const double gamma = std::max(est.gamma1, est.gamma2);
  std::vector<RecordedRun> runs;
  for (double l : cfg.lambda0s)
    for (double m : cfg.mus) {
      const SolverConfig scfg = solver_config(cfg, p, l, m);
      RecordedRun r{cfg_path.stem().string() + " lambda0=" + fmt(l) + " mu=" + fmt(m), run(p.f, p.set, p.x0, scfg),
                    scfg, gamma, std::nullopt};
      const RunResult rr = run(p.f, p.set, p.x0, reference_solver_config(cfg, p, l, m));
      const Certificate c = certify_equilibrium(p.f, p.set, rr.final_x, Grid::uniform(p.set.dim(), grid_points), slack);
      out.require(rr.status == RunStatus::Converged && c.certified, "reference of " + r.label + " not certified (status " + std::string(to_string(rr.status)) +
                                                                       ", min " + fmt(c.worst_value) + ")");
      if (c.certified) r.certified_reference = rr.final_x;
      runs.push_back(std::move(r));
    }
  return runs;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <configs-dir>\n";
    return 2;
  }
  const fs::path configs = argv[1];

  criterion(1, "geometry identities, 1000 random cases per manifold kind, tol 1e-10", 1.0, [](Outcome& out) {
    std::uniform_real_distribution<double> tdist(-2.0, 2.0);
    for (const auto& m : manifold_kinds()) {
      std::mt19937_64 rng(101);
      double worst = 0;
      for (int k = 0; k < 1000; ++k) {
        const Pointd x = random_point(m, rng), y = random_point(m, rng);
        const Tangentd v = random_tangent(x, rng);
        const double t = tdist(rng);
        worst = std::max({worst, distance(exp_map(x, log_map(x, y), 1.0), y),
                          std::abs(norm(log_map(x, y)) - distance(x, y)),
                          std::abs(distance(x, exp_map(x, v, t)) - std::abs(t) * norm(v)),
                          std::abs(norm(parallel_transport(x, y, v)) - norm(v)),
                          std::abs(distance(x, y) - (to_chart(x) - to_chart(y)).norm())});
      }
      out.require(worst <= 1e-10, "worst deviation " + fmt(worst) + " on a manifold with " +
                                      std::to_string(m->components().size()) + " component(s)");
    }
  });

  criterion(2, "comparison-triangle relation holds with equality within 1e-9", 0, [](Outcome& out) {
    for (const auto& m : manifold_kinds()) {
      std::mt19937_64 rng(202);
      double worst = 0;
      bool inequality = true;
      for (int k = 0; k < 1000; ++k) {
        const Pointd p1 = random_point(m, rng), p2 = random_point(m, rng), p3 = random_point(m, rng);
        const double lhs = squared_distance(p1, p2) + squared_distance(p2, p3) -
                           2 * inner(p2, log_map(p2, p1), log_map(p2, p3));
        const double rhs = squared_distance(p1, p3);
        inequality = inequality && lhs <= rhs + 1e-9;
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      out.require(inequality && worst <= 1e-9, "worst |lhs - rhs| " + fmt(worst));
    }
  });

  criterion(3, "Cournot linear form equals profit-based oracle on 10000 pairs, rel 1e-6", 1.0, [](Outcome& out) {
    const auto m = Manifoldd::positive_orthant(4);
    const Boxd set = table1_bounds(m);
    const auto f = make_linear_bifunction(build_nash_cournot(table1_model()));
    std::mt19937_64 rng(303);
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
      const Eigen::VectorXd x = set.sample(rng).coords(), y = set.sample(rng).coords();
      const double oracle = testing::phi(x, y) - testing::phi(x, x);
      worst = std::max(worst, std::abs(f(x, y) - oracle) / (1 + std::abs(testing::phi(x, y))));
    }
    out.require(worst <= 1e-6, "worst relative gap " + fmt(worst));
  });

  criterion(4, "prox solver within 2 grid steps of grid argmin on all bundled 1-D/2-D problems", 30.0, [](Outcome& out) {
    for (const auto& p : testing::bundled_prox_problems()) {
      const auto pr = p.problem();
      const Grid g = Grid::with_spacing(pr.set, p.manifold->dim() == 1 ? 1e-4 : 1e-3);
      ProxConfig cfg;
      cfg.multi_starts = default_multi_starts(*p.manifold);
      const double d = distance(solve(pr, cfg).y, grid_prox(pr, g));
      out.require(d <= 2 * g.spacing(pr.set), p.name + " distance " + fmt(d));
    }
  });

  criterion(5, "closed-form 1-D run: x_n = 0.75^n, lambda = 0.5, r = 0.5625", 0, [](Outcome& out) {
    const auto m = Manifoldd::euclidean(1);
    const Boxd set(m, testing::vec({-5}), testing::vec({5}));
    SolverConfig cfg;
    cfg.lambda0 = 0.5;
    cfg.mu = 0.5;
    cfg.stop_tol = 1e-8;
    const auto res = run(builtin("x_y_minus_x"), set, Pointd(m, testing::vec({1})), cfg);
    out.require(res.trace.records.size() > 40, "fewer than 41 iterations recorded");
    double worst = 0;
    for (const auto& r : res.trace.records) {
      if (r.n > 40) break;
      worst = std::max(worst, std::abs(r.x[0] - std::pow(0.75, r.n)));
      out.require(r.lambda == 0.5 && r.lambda_next == 0.5, "lambda changed at n=" + std::to_string(r.n));
    }
    out.require(worst <= 1e-8, "worst |x_n - 0.75^n| " + fmt(worst));
    const auto rate = analyze_rate(res.trace, Pointd(m, testing::vec({0})));
    out.require(rate.r && std::abs(*rate.r - 0.5625) <= 1e-3, "fitted r " + (rate.r ? fmt(*rate.r) : "absent"));
    if (rate.r) out.detail << "r=" << *rate.r;
  });

  criterion(6, "stepsize monotone and bounded below, stopping sound, per-iteration certificate slack 1e-7", 0,
            [&](Outcome& out) {
              std::vector<RecordedRun> runs;
              for (auto&& r : record_runs(configs / "toy1d.cfg", 1001, 1e-9, out)) runs.push_back(std::move(r));
              for (auto&& r : record_runs(configs / "euclid2d.cfg", 601, 1e-6, out)) runs.push_back(std::move(r));
              for (auto&& r : record_runs(configs / "nash_cournot.cfg", 21, 1e-3, out)) runs.push_back(std::move(r));
              double worst_excess = -INFINITY, worst_margin = INFINITY;
              for (const auto& run : runs) {
                const double floor = std::min(run.cfg.lambda0, run.cfg.mu / (2 * run.gamma));
                double prev = run.cfg.lambda0;
                for (const auto& r : run.result.trace.records) {
                  out.require(r.lambda <= prev && r.lambda_next <= r.lambda,
                              run.label + ": lambda increased at n=" + std::to_string(r.n));
                  worst_margin = std::min(worst_margin, r.lambda_next - floor);
                  out.require(r.lambda_next >= floor - 1e-12, run.label + ": lambda below floor at n=" + std::to_string(r.n));
                  prev = r.lambda;
                  if (run.certified_reference) {
                    const double e = fejer_certificate_excess(r, *run.certified_reference, run.cfg.mu);
                    worst_excess = std::max(worst_excess, e);
                    out.require(e <= 1e-7, run.label + ": certificate excess " + fmt(e) + " at n=" + std::to_string(r.n));
                  }
                }
                if (run.result.status == RunStatus::Converged)
                  out.require(run.result.trace.records.back().eps <= run.cfg.stop_tol &&
                                  run.result.final_x.coords() == run.result.trace.records.back().x.coords(),
                              run.label + ": converged without meeting the stopping rule");
                else
                  out.require(false, run.label + ": did not converge");
              }
              out.detail << runs.size() << " runs, worst certificate excess " << worst_excess << ", worst lambda margin "
                         << worst_margin;
            });

  criterion(7, "four-firm experiment: every default sweep pair converges, certifies, and decays R-linearly", 120.0,
            [&](Outcome& out) {
              RunConfig cfg = load_config(configs / "nash_cournot.cfg");
              out.require(cfg.lambda0s == kDefaultLambda0s && cfg.mus == kDefaultMus, "config does not use the default sweep");
              out.require(cfg.stop_tol == 1e-6 && cfg.max_outer == 500, "config stop_tol/max_outer differ from 1e-6/500");
              const Problem p = build_problem(cfg);
              out.require(p.x0.coords() == table1_start(), "unexpected starting point");
              for (double l : cfg.lambda0s)
                for (double m : cfg.mus) {
                  const std::string label = "lambda0=" + fmt(l) + " mu=" + fmt(m);
                  const SingleRun sr = run_single(cfg, p, l, m);
                  const auto& recs = sr.result.trace.records;
                  out.require(sr.result.status == RunStatus::Converged && recs.back().eps <= 1e-6 && recs.size() <= 500,
                              label + " did not reach eps <= 1e-6 within 500 iterations");
                  const Certificate c =
                      certify_equilibrium(p.f, p.set, sr.result.final_x, Grid::uniform(4, 21), 1e-3);
                  out.require(c.certified, label + " final point not certified (min " + fmt(c.worst_value) + ")");
                  out.require(sr.rate && sr.rate->r && *sr.rate->r < 1 && sr.rate->fejer_monotone_after,
                              label + " no R-linear fit with finite n0");
                  out.require(recs.size() > 20 && recs[20].eps <= 0.1 * recs[0].eps, label + " eps_20 > 0.1 eps_0");
                  out.detail << label << ": " << recs.size() << " it, r=" << (sr.rate && sr.rate->r ? *sr.rate->r : NAN)
                             << ", n0=" << (sr.rate && sr.rate->fejer_monotone_after ? *sr.rate->fejer_monotone_after : -1)
                             << "; ";
                }
            });

  criterion(8, "Euclidean reduction matches an independent flat extragradient within 1e-6 for 50 iterations", 0,
            [](Outcome& out) {
              const auto data = testing::euclid2d_data();
              const auto m = Manifoldd::euclidean(2);
              const Eigen::VectorXd lo = testing::vec({-3, -3}), hi = testing::vec({3, 3});
              const Boxd set(m, lo, hi);
              for (const double lambda0 : {0.5, 2.0}) {
                SolverConfig cfg;
                cfg.lambda0 = lambda0;
                cfg.mu = 0.4;
                cfg.stop_tol = 0.0;
                cfg.max_outer = 50;
                const auto res = run(make_linear_bifunction(data), set, Pointd(m, hi), cfg);
                const auto flat = flat_extragradient(data, lo, hi, hi, lambda0, cfg.mu, 50);
                const auto& recs = res.trace.records;
                out.require(recs.size() == 50 || res.status == RunStatus::Converged, "run ended early");
                double worst = 0;
                for (std::size_t n = 0; n < recs.size(); ++n)
                  worst = std::max(worst, (recs[n].x.coords() - flat[n].x).cwiseAbs().maxCoeff());
                // A run that stopped at eps = 0 sits at a fixed point for the remaining iterations.
                for (std::size_t n = recs.size(); n < flat.size(); ++n)
                  worst = std::max(worst, (res.final_x.coords() - flat[n].x).cwiseAbs().maxCoeff());
                out.require(worst <= 1e-6, "lambda0=" + fmt(lambda0) + " worst coordinate gap " + fmt(worst));
                out.detail << "lambda0=" << lambda0 << ": " << recs.size() << " it, worst gap " << worst << "; ";
              }
            });

  criterion(9, "replay reproduces every bundled config", 0, [&](Outcome& out) {
    const fs::path work = fs::temp_directory_path() / "heg_acceptance_replay";
    int traces = 0;
    for (const auto& entry : fs::directory_iterator(configs)) {
      if (entry.path().extension() != ".cfg") continue;
      const RunConfig cfg = load_config(entry.path());
      const fs::path dir = work / entry.path().stem();
      fs::remove_all(dir);
      const auto res = run_experiment(cfg, {dir, 1, std::nullopt, true});
      for (const auto& a : res.runs) {
        const auto rep = replay_check(dir / a.trace_file, cfg);
        out.require(rep.identical, entry.path().filename().string() + "/" + a.trace_file + ": " + rep.message);
        ++traces;
      }
    }
    out.require(traces > 0, "no bundled configs found in " + configs.string());
    out.detail << traces << " traces replayed";
  });

  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
