#include "heg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "heg/prox.hpp"

namespace heg {

namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the source; good enough to point a
// user at the offending entry.
int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(key.empty() ? msg : "'" + key + "': " + msg, key.empty() ? 0 : line_of_key(text_, key));
  }

  const json& require(const json& obj, const std::string& key) const {
    if (!obj.is_object() || !obj.contains(key)) fail(key, "missing required entry");
    return obj.at(key);
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  std::vector<double> numbers(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(number(e, key));
    return out;
  }

  Eigen::VectorXd vector(const json& v, const std::string& key) const {
    const auto xs = numbers(v, key);
    return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }

  Eigen::MatrixXd matrix(const json& v, const std::string& key) const {
    if (!v.is_array() || v.empty()) fail(key, "expected a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto row = numbers(v[static_cast<std::size_t>(i)], key);
      if (i == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
      if (static_cast<Eigen::Index>(row.size()) != m.cols()) fail(key, "rows have different lengths");
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
  }

 private:
  const std::string& text_;
};

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object", 1);
  const Reader rd(text);
  RunConfig cfg;

  const json& man = rd.require(doc, "manifold");
  if (!man.is_array() || man.empty()) rd.fail("manifold", "expected a nonempty list of components");
  for (const auto& c : man) {
    const auto& kind = rd.require(c, "kind");
    if (!kind.is_string()) rd.fail("kind", "expected a string");
    try {
      cfg.manifold.push_back({parse_component_kind(kind.get<std::string>()), rd.integer(rd.require(c, "dim"), "dim")});
    } catch (const UsageError& e) {
      rd.fail("kind", e.what());
    }
    if (cfg.manifold.back().dim <= 0) rd.fail("dim", "must be positive");
  }

  const json& prob = rd.require(doc, "problem");
  const json& kind = rd.require(prob, "kind");
  if (!kind.is_string()) rd.fail("kind", "expected a string");
  cfg.problem.kind = kind.get<std::string>();
  if (cfg.problem.kind == "nash_cournot") {
    cfg.problem.nash.a = rd.vector(rd.require(prob, "a"), "a");
    cfg.problem.nash.b = rd.vector(rd.require(prob, "b"), "b");
    cfg.problem.nash.alpha = rd.vector(rd.require(prob, "alpha"), "alpha");
    cfg.problem.nash.beta = prob.contains("beta") ? rd.vector(prob.at("beta"), "beta")
                                                  : Eigen::VectorXd::Zero(cfg.problem.nash.a.size()).eval();
  } else if (cfg.problem.kind == "linear") {
    cfg.problem.linear.C = rd.matrix(rd.require(prob, "C"), "C");
    cfg.problem.linear.D = rd.matrix(rd.require(prob, "D"), "D");
    cfg.problem.linear.q = rd.vector(rd.require(prob, "q"), "q");
  } else if (cfg.problem.kind == "builtin_1d") {
    const json& name = rd.require(prob, "name");
    if (!name.is_string()) rd.fail("name", "expected a string");
    cfg.problem.builtin_name = name.get<std::string>();
  } else {
    rd.fail("kind", "unknown problem kind '" + cfg.problem.kind + "'");
  }

  const json& bounds = rd.require(doc, "bounds");
  if (!bounds.is_array() || bounds.empty()) rd.fail("bounds", "expected [[lo, hi], ...]");
  cfg.lower.resize(static_cast<Eigen::Index>(bounds.size()));
  cfg.upper.resize(static_cast<Eigen::Index>(bounds.size()));
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto pair = rd.numbers(bounds[i], "bounds");
    if (pair.size() != 2) rd.fail("bounds", "each entry must be [lo, hi]");
    cfg.lower[static_cast<Eigen::Index>(i)] = pair[0];
    cfg.upper[static_cast<Eigen::Index>(i)] = pair[1];
  }
  cfg.x0 = rd.vector(rd.require(doc, "x0"), "x0");

  if (doc.contains("sweep")) {
    const json& sweep = doc.at("sweep");
    cfg.lambda0s = rd.numbers(rd.require(sweep, "lambda0"), "lambda0");
    cfg.mus = rd.numbers(rd.require(sweep, "mu"), "mu");
    if (cfg.lambda0s.empty()) rd.fail("lambda0", "sweep list must not be empty");
    if (cfg.mus.empty()) rd.fail("mu", "sweep list must not be empty");
  } else {
    cfg.lambda0s = kDefaultLambda0s;
    cfg.mus = kDefaultMus;
    cfg.default_sweep = true;
  }
  for (double l : cfg.lambda0s)
    if (!(l > 0.0)) rd.fail("lambda0", "values must be positive");
  for (double m : cfg.mus)
    if (!(m > 0.0 && m < 1.0)) rd.fail("mu", "values must lie in (0, 1)");

  if (doc.contains("stop_tol")) cfg.stop_tol = rd.number(doc.at("stop_tol"), "stop_tol");
  if (doc.contains("max_outer")) cfg.max_outer = rd.integer(doc.at("max_outer"), "max_outer");
  if (!(cfg.stop_tol >= 0.0)) rd.fail("stop_tol", "must be >= 0");
  if (cfg.max_outer < 1) rd.fail("max_outer", "must be >= 1");
  if (doc.contains("inner")) {
    const json& in = doc.at("inner");
    if (in.contains("tol")) cfg.inner_tol = rd.number(in.at("tol"), "tol");
    if (in.contains("max_iters")) cfg.inner_max_iters = rd.integer(in.at("max_iters"), "max_iters");
    if (in.contains("multi_starts")) cfg.inner_multi_starts = rd.integer(in.at("multi_starts"), "multi_starts");
    if (!(cfg.inner_tol > 0.0)) rd.fail("tol", "must be positive");
    if (cfg.inner_max_iters < 1) rd.fail("max_iters", "must be >= 1");
    if (cfg.inner_multi_starts && *cfg.inner_multi_starts < 0) rd.fail("multi_starts", "must be >= 0");
  }
  if (doc.contains("reference")) {
    const json& ref = doc.at("reference");
    if (ref.contains("stop_tol")) cfg.reference_tol = rd.number(ref.at("stop_tol"), "stop_tol");
    if (ref.contains("max_outer")) cfg.reference_max_outer = rd.integer(ref.at("max_outer"), "max_outer");
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) rd.fail("output_dir", "expected a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) rd.fail("seed", "expected a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  // Cross-checks that need the assembled problem.
  try {
    const Problem p = build_problem(cfg);
    (void)p;
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    const std::string key = msg.find("start") != std::string::npos ? "x0"
                            : msg.find("box") != std::string::npos ? "bounds"
                                                                   : "problem";
    rd.fail(key, msg);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path.string() + "'", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  json man = json::array();
  for (const auto& c : cfg.manifold) man.push_back({{"kind", to_string(c.kind)}, {"dim", c.dim}});
  j["manifold"] = man;
  json prob{{"kind", cfg.problem.kind}};
  if (cfg.problem.kind == "nash_cournot") {
    prob["a"] = vec_json(cfg.problem.nash.a);
    prob["b"] = vec_json(cfg.problem.nash.b);
    prob["alpha"] = vec_json(cfg.problem.nash.alpha);
    prob["beta"] = vec_json(cfg.problem.nash.beta);
  } else if (cfg.problem.kind == "linear") {
    prob["C"] = mat_json(cfg.problem.linear.C);
    prob["D"] = mat_json(cfg.problem.linear.D);
    prob["q"] = vec_json(cfg.problem.linear.q);
  } else {
    prob["name"] = cfg.problem.builtin_name;
  }
  j["problem"] = prob;
  json bounds = json::array();
  for (Eigen::Index i = 0; i < cfg.lower.size(); ++i) bounds.push_back({cfg.lower[i], cfg.upper[i]});
  j["bounds"] = bounds;
  j["x0"] = vec_json(cfg.x0);
  j["sweep"] = {{"lambda0", cfg.lambda0s}, {"mu", cfg.mus}};
  j["stop_tol"] = cfg.stop_tol;
  j["max_outer"] = cfg.max_outer;
  const int starts = cfg.inner_multi_starts.value_or(
      default_multi_starts(Manifoldd(cfg.manifold)));
  j["inner"] = {{"tol", cfg.inner_tol}, {"max_iters", cfg.inner_max_iters}, {"multi_starts", starts}};
  j["reference"] = {{"stop_tol", cfg.reference_tol}, {"max_outer", cfg.reference_max_outer}};
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.manifold = {{ComponentKind::LogPositiveOrthant, 4}};
  cfg.problem.kind = "nash_cournot";
  cfg.problem.nash = table1_model();
  const Boxd box = table1_bounds(Manifoldd::make(cfg.manifold));
  cfg.lower = box.lower();
  cfg.upper = box.upper();
  cfg.x0 = table1_start();
  cfg.lambda0s = kDefaultLambda0s;
  cfg.mus = kDefaultMus;
  cfg.default_sweep = true;
  return cfg;
}

Problem build_problem(const RunConfig& cfg) {
  auto manifold = Manifoldd::make(cfg.manifold);
  Boxd set(manifold, cfg.lower, cfg.upper);
  std::optional<LinearBifunctionData> linear;
  if (cfg.problem.kind == "nash_cournot") {
    linear = build_nash_cournot(cfg.problem.nash);
  } else if (cfg.problem.kind == "linear") {
    linear = cfg.problem.linear;
  }
  Bifunction f = linear ? make_linear_bifunction(*linear, cfg.problem.kind)
                        : builtin(cfg.problem.builtin_name, manifold->dim());
  if (f.dim() != manifold->dim()) throw UsageError("problem dimension does not match manifold");
  if (cfg.x0.size() != manifold->dim()) throw UsageError("starting point dimension does not match manifold");
  Pointd x0(manifold, cfg.x0);
  if (!set.contains(x0)) throw UsageError("starting point is outside the box");
  return {manifold, std::move(set), std::move(f), std::move(linear), std::move(x0)};
}

SolverConfig solver_config(const RunConfig& cfg, const Problem& problem, double lambda0, double mu) {
  SolverConfig s;
  s.lambda0 = lambda0;
  s.mu = mu;
  s.stop_tol = cfg.stop_tol;
  s.max_outer = cfg.max_outer;
  s.inner.tol = cfg.inner_tol;
  s.inner.max_iters = cfg.inner_max_iters;
  s.inner.multi_starts = cfg.inner_multi_starts.value_or(default_multi_starts(*problem.manifold));
  s.seed = cfg.seed;
  return s;
}

SolverConfig reference_solver_config(const RunConfig& cfg, const Problem& problem, double lambda0, double mu) {
  SolverConfig s = solver_config(cfg, problem, lambda0, mu);
  s.stop_tol = cfg.reference_tol;
  s.max_outer = cfg.reference_max_outer;
  s.inner.tol = std::min(cfg.inner_tol, 1e-3 * cfg.reference_tol);
  return s;
}

}  // namespace heg
