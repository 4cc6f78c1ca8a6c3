#include "heg/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace heg {

void write_trace_csv(std::ostream& out, const Trace& trace, bool timing) {
  const auto dim = trace.records.empty() ? 0 : trace.records.front().x.dim();
  out << "n,eps,lambda,denom,elapsed_s,inner_iters_y,inner_iters_x";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << '\n';
  out << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.n << ',' << r.eps << ',' << r.lambda << ',' << r.denominator << ','
        << (timing ? r.elapsed : 0.0) << ',' << r.inner_iters_y << ',' << r.inner_iters_x;
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << r.x[i];
    out << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,eps,lambda", 0) != 0)
    throw std::runtime_error("trace file is missing its header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() < 7) throw std::runtime_error("trace row has too few columns");
    TraceRow r;
    r.n = std::stol(cells[0]);
    r.eps = std::stod(cells[1]);
    r.lambda = std::stod(cells[2]);
    r.denom = std::stod(cells[3]);
    r.elapsed = std::stod(cells[4]);
    r.inner_iters_y = std::stol(cells[5]);
    r.inner_iters_x = std::stol(cells[6]);
    for (std::size_t i = 7; i < cells.size(); ++i) r.x.push_back(std::stod(cells[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

std::optional<TraceMismatch> compare_traces(const std::vector<TraceRow>& expected,
                                            const std::vector<TraceRow>& actual, double eps_tol) {
  const std::size_t common = std::min(expected.size(), actual.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto& a = expected[i];
    const auto& b = actual[i];
    auto diff = [&](const std::string& col, double va, double vb) {
      std::ostringstream os;
      os << std::setprecision(17) << "column " << col << ": expected " << va << ", got " << vb;
      return TraceMismatch{i, os.str()};
    };
    if (a.n != b.n) return diff("n", double(a.n), double(b.n));
    if (!(std::abs(a.eps - b.eps) <= eps_tol)) return diff("eps", a.eps, b.eps);
    if (!close_rel(a.lambda, b.lambda, eps_tol)) return diff("lambda", a.lambda, b.lambda);
    if (!close_rel(a.denom, b.denom, eps_tol)) return diff("denom", a.denom, b.denom);
    if (a.inner_iters_y != b.inner_iters_y) return diff("inner_iters_y", double(a.inner_iters_y), double(b.inner_iters_y));
    if (a.inner_iters_x != b.inner_iters_x) return diff("inner_iters_x", double(a.inner_iters_x), double(b.inner_iters_x));
    if (a.x.size() != b.x.size()) return TraceMismatch{i, "coordinate count differs"};
    for (std::size_t k = 0; k < a.x.size(); ++k)
      if (!close_rel(a.x[k], b.x[k], eps_tol)) return diff("x" + std::to_string(k + 1), a.x[k], b.x[k]);
  }
  if (expected.size() != actual.size()) {
    return TraceMismatch{common, "row count differs: expected " + std::to_string(expected.size()) +
                                     ", got " + std::to_string(actual.size())};
  }
  return std::nullopt;
}

}  // namespace heg
