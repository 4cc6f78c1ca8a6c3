#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heg/extragradient.hpp"

namespace heg {

/// One CSV row: n, eps, lambda, denom, elapsed_s, inner_iters_y, inner_iters_x, x_1..x_d.
struct TraceRow {
  long n = 0;
  double eps = 0.0;
  double lambda = 0.0;
  double denom = 0.0;
  double elapsed = 0.0;
  long inner_iters_y = 0;
  long inner_iters_x = 0;
  std::vector<double> x;
};

/// With `timing` false the elapsed column is written as 0.
void write_trace_csv(std::ostream& out, const Trace& trace, bool timing = true);
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct TraceMismatch {
  std::size_t row;  // 0-based data row; equals the shorter length when the row counts differ
  std::string what;
};

/// Row-by-row comparison ignoring elapsed time. eps must agree to `eps_tol`
/// absolutely; other real columns to `eps_tol` relative; counters exactly.
std::optional<TraceMismatch> compare_traces(const std::vector<TraceRow>& expected,
                                            const std::vector<TraceRow>& actual, double eps_tol = 1e-9);

}  // namespace heg
