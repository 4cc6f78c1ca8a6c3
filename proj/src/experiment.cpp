#include "heg/experiment.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "heg/oracle.hpp"
#include "heg/trace_io.hpp"

namespace heg {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string run_stem(int index) {
  std::ostringstream os;
  os << "run_" << std::setw(3) << std::setfill('0') << index;
  return os.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << bytes;
}

json rate_json(const RateReport& r) {
  json j;
  j["fejer_monotone_after"] = r.fejer_monotone_after ? json(*r.fejer_monotone_after) : json("never");
  j["r"] = r.r ? json(*r.r) : json(nullptr);
  j["M"] = r.M;
  j["fitted_slope"] = r.fitted_slope;
  j["fit_rms"] = r.fit_rms;
  j["fit_r2"] = r.fit_r2;
  j["fit_points"] = r.fit_points;
  j["kappa_from"] = r.kappa_from ? json(*r.kappa_from) : json(nullptr);
  j["kappa"] = r.kappa;
  j["kappa_margin_ok"] = r.kappa_margin_ok;
  j["lambda_nonincreasing"] = r.lambda_nonincreasing;
  j["lambda_floor_ok"] = r.lambda_floor_ok ? json(*r.lambda_floor_ok) : json(nullptr);
  j["lambda_limit"] = r.lambda_limit;
  return j;
}

}  // namespace

SingleRun run_single(const RunConfig& cfg, const Problem& problem, double lambda0, double mu) {
  const SolverConfig scfg = solver_config(cfg, problem, lambda0, mu);
  SingleRun out{lambda0, mu, run(problem.f, problem.set, problem.x0, scfg), std::nullopt, RunStatus::MaxIterations, std::nullopt};
  if (out.result.status == RunStatus::Aborted || out.result.trace.records.empty()) return out;

  const RunResult ref = run(problem.f, problem.set, problem.x0, reference_solver_config(cfg, problem, lambda0, mu));
  out.reference_status = ref.status;
  if (ref.status == RunStatus::Aborted) return out;
  out.reference = ref.final_x;

  if (problem.linear) {
    out.gamma_bound = lipschitz_upper_bound(*problem.linear, problem.set);
    out.gamma_is_upper_bound = true;
  } else {
    out.gamma_bound = estimate_lipschitz(problem.f, problem.set, 20000, cfg.seed).gamma1;
  }
  RateOptions ro;
  ro.mu = mu;
  ro.lambda0 = lambda0;
  ro.gamma = out.gamma_bound;
  out.rate = analyze_rate(out.result.trace, *out.reference, ro);
  return out;
}

json summary_json(const RunConfig& cfg, const SingleRun& run) {
  json j;
  j["status"] = to_string(run.result.status);
  if (!run.result.message.empty()) j["message"] = run.result.message;
  j["lambda0"] = run.lambda0;
  j["mu"] = run.mu;
  j["iterations"] = run.result.trace.records.size();
  j["final_point"] = vec_json(run.result.final_x.coords());
  if (!run.result.trace.records.empty()) {
    const auto& last = run.result.trace.records.back();
    j["final_eps"] = last.eps;
    j["final_lambda"] = last.lambda_next;
    bool inner_ok = true;
    for (const auto& r : run.result.trace.records) inner_ok = inner_ok && r.inner_converged;
    j["inner_all_converged"] = inner_ok;
  }
  if (run.reference) {
    j["reference_point"] = vec_json(run.reference->coords());
    j["reference_status"] = to_string(run.reference_status);
  }
  j["gamma"] = run.gamma_bound;
  j["gamma_source"] = run.gamma_is_upper_bound ? "analytic_upper_bound" : "sampled_estimate";
  if (run.rate) j["rate"] = rate_json(*run.rate);
  j["config"] = to_json(cfg);
  return j;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

ExperimentResult run_experiment(const RunConfig& cfg_in, const ExperimentOptions& opts) {
  RunConfig cfg = cfg_in;
  if (opts.seed) cfg.seed = *opts.seed;
  const std::filesystem::path dir = opts.out_dir.empty() ? std::filesystem::path(cfg.output_dir) : opts.out_dir;
  std::filesystem::create_directories(dir);
  const Problem problem = build_problem(cfg);

  std::vector<std::pair<double, double>> pairs;
  for (double l : cfg.lambda0s)
    for (double m : cfg.mus) pairs.emplace_back(l, m);

  ExperimentResult res;
  res.runs.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        const auto [l, m] = pairs[i];
        const SingleRun sr = run_single(cfg, problem, l, m);
        std::ostringstream csv;
        write_trace_csv(csv, sr.result.trace, opts.timing);
        const std::string summary = summary_json(cfg, sr).dump(2) + "\n";
        const std::string stem = run_stem(static_cast<int>(i));
        write_file(dir / (stem + ".csv"), csv.str());
        write_file(dir / (stem + ".json"), summary);

        RunArtifact& a = res.runs[i];
        a.index = static_cast<int>(i);
        a.lambda0 = l;
        a.mu = m;
        a.status = sr.result.status;
        a.trace_file = stem + ".csv";
        a.summary_file = stem + ".json";
        a.trace_sha256 = sha256_hex(csv.str());
        a.summary_sha256 = sha256_hex(summary);
        a.iterations = static_cast<int>(sr.result.trace.records.size());
        a.final_eps = sr.result.trace.records.empty() ? 0.0 : sr.result.trace.records.back().eps;
        a.message = sr.result.message;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(pairs.size())));
  {
    std::vector<std::jthread> threads;
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);

  json manifest;
  manifest["sweep"] = {{"lambda0", cfg.lambda0s}, {"mu", cfg.mus}};
  manifest["sweep_source"] = cfg.default_sweep ? "default stand-in (not taken from any published legend)" : "config";
  manifest["seed"] = cfg.seed;
  manifest["config_sha256"] = sha256_hex(to_json(cfg).dump());
  json runs = json::array();
  for (const auto& a : res.runs) {
    res.any_aborted = res.any_aborted || a.status == RunStatus::Aborted;
    json r{{"index", a.index},       {"lambda0", a.lambda0},
           {"mu", a.mu},             {"status", to_string(a.status)},
           {"trace", a.trace_file},  {"summary", a.summary_file},
           {"trace_sha256", a.trace_sha256}, {"summary_sha256", a.summary_sha256},
           {"iterations", a.iterations}, {"final_eps", a.final_eps}};
    if (!a.message.empty()) r["message"] = a.message;
    runs.push_back(r);
  }
  manifest["runs"] = runs;
  res.manifest = dir / "manifest.json";
  write_file(res.manifest, manifest.dump(2) + "\n");
  return res;
}

ReplayOutcome replay_check(const std::filesystem::path& trace_path, const RunConfig& cfg_in,
                           std::optional<std::uint64_t> seed) {
  RunConfig cfg = cfg_in;
  if (seed) cfg.seed = *seed;
  const std::vector<TraceRow> expected = [&] {
    std::istringstream in(read_file(trace_path));
    return read_trace_csv(in);
  }();
  const Problem problem = build_problem(cfg);

  std::vector<std::pair<double, double>> candidates;
  const auto manifest_path = trace_path.parent_path() / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const json manifest = json::parse(read_file(manifest_path));
    for (const auto& r : manifest.value("runs", json::array()))
      if (r.value("trace", "") == trace_path.filename().string())
        candidates.emplace_back(r.at("lambda0").get<double>(), r.at("mu").get<double>());
  }
  if (candidates.empty())
    for (double l : cfg.lambda0s)
      for (double m : cfg.mus) candidates.emplace_back(l, m);

  ReplayOutcome out;
  std::optional<TraceMismatch> best;
  for (const auto& [l, m] : candidates) {
    const RunResult rr = run(problem.f, problem.set, problem.x0, solver_config(cfg, problem, l, m));
    std::ostringstream csv;
    write_trace_csv(csv, rr.trace, false);
    std::istringstream in(csv.str());
    const auto mismatch = compare_traces(expected, read_trace_csv(in));
    if (!mismatch) {
      out.identical = true;
      out.lambda0 = l;
      out.mu = m;
      out.message = "trace reproduced";
      return out;
    }
    if (!best || mismatch->row > best->row) {
      best = mismatch;
      out.lambda0 = l;
      out.mu = m;
    }
  }
  std::ostringstream msg;
  msg << "first divergent row " << best->row << " (lambda0=" << *out.lambda0 << ", mu=" << *out.mu
      << "): " << best->what;
  out.message = msg.str();
  return out;
}

CertifyOutcome certify_summary(const json& summary, Eigen::Index points_per_axis, double slack, double budget) {
  if (!summary.contains("config") || !summary.contains("final_point"))
    throw UsageError("summary is missing 'config' or 'final_point'");
  const RunConfig cfg = parse_config(summary.at("config").dump(2));
  const Problem problem = build_problem(cfg);
  const auto fp = summary.at("final_point").get<std::vector<double>>();
  const Pointd xstar(problem.manifold, Eigen::Map<const Eigen::VectorXd>(fp.data(), static_cast<Eigen::Index>(fp.size())));
  Grid grid = Grid::uniform(problem.manifold->dim(), points_per_axis);
  grid.budget = budget;
  const Certificate c = certify_equilibrium(problem.f, problem.set, xstar, grid, slack);
  return {c.certified, c.worst_value, c.worst_y, grid.total_points()};
}

}  // namespace heg
