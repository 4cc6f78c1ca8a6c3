#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "heg/feasible.hpp"
#include "heg/manifold.hpp"

namespace heg {

/// Equilibrium bifunction f(x, y), evaluated on ambient coordinates, together
/// with the ambient gradient of y -> f(x, y).
class Bifunction {
 public:
  using Value = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  Bifunction(std::string name, Eigen::Index dim, Value value, Gradient gradient)
      : name_(std::move(name)), dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)) {}

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return value_(x, y); }
  Eigen::VectorXd ambient_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return gradient_(x, y);
  }
  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }

 private:
  std::string name_;
  Eigen::Index dim_;
  Value value_;
  Gradient gradient_;
};

double evaluate(const Bifunction& f, const Pointd& x, const Pointd& y);

/// Gradient of u -> f(x, from_chart(u)) at u = to_chart(y), in chart coordinates.
Eigen::VectorXd grad_second(const Bifunction& f, const Pointd& x, const Pointd& y);

/// f(x, y) = <C x + D y + q, y - x>.
struct LinearBifunctionData {
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
  Eigen::VectorXd q;
};

struct LinearStructure {
  bool d_symmetric = false;
  bool d_psd = false;
  /// Symmetric part of D - C is negative semidefinite / definite.
  bool monotone_part_nsd = false;
  bool monotone_part_nd = false;
  double max_eigenvalue = 0.0;  // of the symmetric part of D - C
  double min_eigenvalue = 0.0;
  bool d_minus_c_symmetric = false;
};

void validate(const LinearBifunctionData& data);
LinearStructure analyze(const LinearBifunctionData& data, double tol = 1e-9);
Bifunction make_linear_bifunction(LinearBifunctionData data, std::string name = "linear");

struct NashCournotModel {
  Eigen::VectorXd a;      // price intercepts
  Eigen::VectorXd b;      // price slopes
  Eigen::VectorXd alpha;  // per-unit tax
  Eigen::VectorXd beta;   // fixed fee
};

void validate(const NashCournotModel& model);

/// Linear form of the Cournot game with p_i(s) = a_i - b_i s and affine costs
/// alpha_i x_i + beta_i: D = diag(b), C = diag(b) + B with B_ij = b_i off the
/// diagonal, q = alpha - a.
LinearBifunctionData build_nash_cournot(const NashCournotModel& model);

/// The four-firm instance used by the bundled experiment.
NashCournotModel table1_model();
Boxd table1_bounds(ManifoldPtr<double> manifold);
Eigen::VectorXd table1_start();

/// Built-in test bifunctions. Names: "x_y_minus_x" (f = x (y - x), 1-D),
/// "y_minus_x" (f = sum(y - x)), "zero".
Bifunction builtin(const std::string& name, Eigen::Index dim = 1);

struct LipschitzEstimate {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double max_violation_ratio = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Smallest gamma1 = gamma2 with f(x,y) + f(y,z) >= f(x,z) - gamma (d^2(x,y) + d^2(y,z))
/// over sampled triples. A lower estimate of the true constants.
LipschitzEstimate estimate_lipschitz(const Bifunction& f, const Boxd& set, std::size_t samples,
                                     std::uint64_t seed);

/// Analytic upper bound for the Lipschitz-type constants of a linear
/// bifunction on a box: gamma = ||S |C - D| S||_2 / 2 where S scales orthant
/// coordinates by their upper bound. Valid under the box's manifold metric.
double lipschitz_upper_bound(const LinearBifunctionData& data, const Boxd& set);

struct Witness {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct Verdict {
  bool falsified = false;
  std::optional<Witness> witness;
};

struct MonotonicityReport {
  Verdict monotone;
  Verdict pseudomonotone;
  /// Largest gamma with f(x,y) + f(y,x) <= -gamma d^2(x,y) on all samples,
  /// under the manifold distance and the ambient Euclidean distance.
  double strong_monotone_modulus = 0.0;
  double strong_monotone_modulus_euclidean = 0.0;
  /// Largest rho with f(x,y) >= 0 => f(y,x) <= -rho d^2(x,y); empty when no
  /// sampled pair had f(x,y) >= 0 with x != y.
  std::optional<double> strong_pseudomonotone_modulus;
  std::optional<double> strong_pseudomonotone_modulus_euclidean;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

MonotonicityReport classify_monotonicity(const Bifunction& f, const Boxd& set, std::size_t samples,
                                         std::uint64_t seed);

/// Pseudomonotonicity relative to a single point: f(xbar, y) >= 0 => f(y, xbar) <= 0.
/// This is the form the convergence argument uses with xbar a solution.
struct PseudomonotoneAtReport {
  Verdict verdict;
  std::optional<double> modulus;  // largest rho with f(y, xbar) <= -rho d^2(y, xbar)
  std::size_t samples = 0;
};

PseudomonotoneAtReport check_pseudomonotone_at(const Bifunction& f, const Boxd& set,
                                               const Pointd& xbar, std::size_t samples,
                                               std::uint64_t seed);

}  // namespace heg
