#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <random>

#include "heg/manifold.hpp"

namespace heg {

/// Per-coordinate interval box. The chart image of a box is again a box, so
/// boxes are geodesically convex on every supported manifold and projection
/// in chart coordinates is a componentwise clamp.
template <typename Scalar>
class Box {
 public:
  using Vector = typename Manifold<Scalar>::Vector;

  Box(ManifoldPtr<Scalar> manifold, Vector lower, Vector upper)
      : manifold_(std::move(manifold)), lower_(std::move(lower)), upper_(std::move(upper)) {
    if (!manifold_) throw UsageError("box requires a manifold");
    if (lower_.size() != manifold_->dim() || upper_.size() != manifold_->dim())
      throw UsageError("box bounds dimension does not match manifold");
    if (!lower_.allFinite() || !upper_.allFinite()) throw UsageError("box bounds must be finite");
    if ((lower_.array() > upper_.array()).any()) throw UsageError("box lower bound exceeds upper bound");
    const auto& mask = manifold_->log_mask();
    for (Eigen::Index i = 0; i < lower_.size(); ++i)
      if (mask[i] && !(lower_[i] > Scalar(kOrthantFloor)))
        throw UsageError("box lower bound must be > 0 on positive-orthant coordinates");
    chart_lower_ = manifold_->to_chart(lower_);
    chart_upper_ = manifold_->to_chart(upper_);
  }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& chart_lower() const { return chart_lower_; }
  const Vector& chart_upper() const { return chart_upper_; }
  Eigen::Index dim() const { return lower_.size(); }
  const Manifold<Scalar>& manifold() const { return *manifold_; }
  const ManifoldPtr<Scalar>& manifold_ptr() const { return manifold_; }

  bool contains(const Point<Scalar>& x) const {
    if (x.dim() != dim()) throw UsageError("point dimension does not match box");
    return (x.coords().array() >= lower_.array()).all() &&
           (x.coords().array() <= upper_.array()).all();
  }

  /// Membership with an absolute slack on every coordinate.
  bool contains(const Point<Scalar>& x, Scalar slack) const {
    if (x.dim() != dim()) throw UsageError("point dimension does not match box");
    return (x.coords().array() >= lower_.array() - slack).all() &&
           (x.coords().array() <= upper_.array() + slack).all();
  }

  Vector project_chart(const Vector& u) const {
    return u.cwiseMax(chart_lower_).cwiseMin(chart_upper_);
  }

  Point<Scalar> project(const Point<Scalar>& x) const {
    return {manifold_, clamp_ambient(manifold_->from_chart(project_chart(manifold_->to_chart(x.coords()))))};
  }

  /// Uniform sample of the chart image of the box.
  template <typename Rng>
  Vector sample_chart(Rng& rng) const {
    Vector u(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      std::uniform_real_distribution<double> d(0.0, 1.0);
      u[i] = chart_lower_[i] + Scalar(d(rng)) * (chart_upper_[i] - chart_lower_[i]);
    }
    return u;
  }

  template <typename Rng>
  Point<Scalar> sample(Rng& rng) const {
    return {manifold_, clamp_ambient(manifold_->from_chart(sample_chart(rng)))};
  }

 private:
  // exp(ln(b)) can land one ulp outside [lower, upper].
  Vector clamp_ambient(Vector x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

  ManifoldPtr<Scalar> manifold_;
  Vector lower_, upper_;
  Vector chart_lower_, chart_upper_;
};

using Boxd = Box<double>;

/// Anything with a manifold, exact membership, and a way to draw members.
template <typename S, typename Scalar>
concept GeodesicSet = requires(const S& s, const Point<Scalar>& p, std::mt19937_64& rng) {
  { s.contains(p) } -> std::convertible_to<bool>;
  { s.sample(rng) } -> std::convertible_to<Point<Scalar>>;
  { s.manifold_ptr() } -> std::convertible_to<ManifoldPtr<Scalar>>;
};

/// Sampling falsifier for geodesic convexity: draws member pairs and a time
/// t in [0,1] and checks that the geodesic point stays inside the set.
/// Sets that offer slack membership get a few ulps of tolerance, since
/// exp/ln rounding can push a boundary point just outside.
template <typename Scalar, GeodesicSet<Scalar> Set>
bool convexity_probe(const Set& set, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw UsageError("convexity_probe needs at least one trial");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < trials; ++k) {
    const Point<Scalar> x = set.sample(rng);
    const Point<Scalar> y = set.sample(rng);
    const Point<Scalar> z = exp_map(x, log_map(x, y), Scalar(unit(rng)));
    if (set.contains(z)) continue;
    if constexpr (requires { set.contains(z, Scalar(0)); }) {
      const Scalar slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon() *
                           (Scalar(1) + z.coords().cwiseAbs().maxCoeff());
      if (set.contains(z, slack)) continue;
    }
    return false;
  }
  return true;
}

}  // namespace heg
