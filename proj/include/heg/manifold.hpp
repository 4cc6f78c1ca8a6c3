#pragma once

// Flat Hadamard manifolds: products of Euclidean blocks and positive-orthant
// blocks carrying the scale-invariant log metric <u,v>_x = sum u_i v_i / x_i^2.
// Every supported manifold is isometric to R^n through a global chart
// (identity on Euclidean coordinates, componentwise ln on orthant ones), so
// geodesics, distances and transports have closed forms.

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heg/errors.hpp"

namespace heg {

enum class ComponentKind { Euclidean, LogPositiveOrthant };

struct Component {
  ComponentKind kind = ComponentKind::Euclidean;
  Eigen::Index dim = 0;

  friend bool operator==(const Component&, const Component&) = default;
};

inline std::string to_string(ComponentKind kind) {
  return kind == ComponentKind::Euclidean ? "euclidean" : "log_positive_orthant";
}

inline ComponentKind parse_component_kind(const std::string& s) {
  if (s == "euclidean") return ComponentKind::Euclidean;
  if (s == "log_positive_orthant") return ComponentKind::LogPositiveOrthant;
  throw UsageError("unknown manifold component kind '" + s + "'");
}

// Orthant coordinates at or below this are rejected instead of clamped.
inline constexpr double kOrthantFloor = 1e-300;

template <typename Scalar>
class Manifold {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

  explicit Manifold(std::vector<Component> components)
      : components_(std::move(components)) {
    if (components_.empty()) throw UsageError("manifold needs at least one component");
    Eigen::Index total = 0;
    for (const auto& c : components_) {
      if (c.dim <= 0) throw UsageError("manifold component dimension must be positive");
      total += c.dim;
    }
    log_mask_.resize(total);
    Eigen::Index offset = 0;
    for (const auto& c : components_) {
      log_mask_.segment(offset, c.dim).setConstant(c.kind == ComponentKind::LogPositiveOrthant);
      offset += c.dim;
    }
  }

  static std::shared_ptr<const Manifold> make(std::vector<Component> components) {
    return std::make_shared<const Manifold>(std::move(components));
  }
  static std::shared_ptr<const Manifold> euclidean(Eigen::Index n) {
    return make({{ComponentKind::Euclidean, n}});
  }
  static std::shared_ptr<const Manifold> positive_orthant(Eigen::Index n) {
    return make({{ComponentKind::LogPositiveOrthant, n}});
  }

  Eigen::Index dim() const { return log_mask_.size(); }
  const std::vector<Component>& components() const { return components_; }
  const Mask& log_mask() const { return log_mask_; }
  bool has_orthant() const { return log_mask_.any(); }

  friend bool operator==(const Manifold& a, const Manifold& b) {
    return a.components_ == b.components_;
  }

  /// Throws unless `x` is a valid point in ambient coordinates.
  void validate_point(const Vector& x) const {
    if (x.size() != dim()) throw UsageError("point dimension does not match manifold");
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      using std::isfinite;
      if (!isfinite(x[i])) throw UsageError("point coordinate is not finite");
      if (log_mask_[i] && !(x[i] > Scalar(kOrthantFloor)))
        throw UsageError("positive-orthant coordinate must be > 0");
    }
  }

  // Coordinate kernels. These skip validation and assume well-formed input.

  Vector to_chart(const Vector& x) const {
    return log_mask_.select(x.array().log(), x.array()).matrix();
  }
  Vector from_chart(const Vector& u) const {
    return log_mask_.select(u.array().exp(), u.array()).matrix();
  }
  /// d(ambient)/d(chart) per coordinate at x: x_i on orthant coordinates, 1 otherwise.
  Vector chart_jacobian(const Vector& x) const {
    return log_mask_.select(x.array(), Scalar(1)).matrix();
  }
  Scalar distance(const Vector& x, const Vector& y) const {
    return (to_chart(x) - to_chart(y)).norm();
  }
  Scalar squared_distance(const Vector& x, const Vector& y) const {
    return (to_chart(x) - to_chart(y)).squaredNorm();
  }
  Vector exp(const Vector& x, const Vector& v, Scalar t) const {
    const auto e = x.array() + t * v.array();
    const auto o = x.array() * (t * v.array() / x.array()).exp();
    return log_mask_.select(o, e).matrix();
  }
  Vector log(const Vector& x, const Vector& y) const {
    return log_mask_.select(x.array() * (y.array() / x.array()).log(), y.array() - x.array())
        .matrix();
  }
  Scalar inner(const Vector& x, const Vector& u, const Vector& v) const {
    const Vector w = chart_jacobian(x);
    return (u.array() * v.array() / w.array().square()).sum();
  }
  /// Tangent vector at x -> chart-coordinate vector (pull back through the chart differential).
  Vector pull_back(const Vector& x, const Vector& v) const {
    return (v.array() / chart_jacobian(x).array()).matrix();
  }
  /// Chart-coordinate vector -> tangent vector at x.
  Vector push_forward(const Vector& x, const Vector& w) const {
    return (w.array() * chart_jacobian(x).array()).matrix();
  }
  Vector transport(const Vector& x, const Vector& y, const Vector& v) const {
    return push_forward(y, pull_back(x, v));
  }

 private:
  std::vector<Component> components_;
  Mask log_mask_;
};

template <typename Scalar>
using ManifoldPtr = std::shared_ptr<const Manifold<Scalar>>;

template <typename Scalar>
class Point {
 public:
  using Vector = typename Manifold<Scalar>::Vector;

  Point(ManifoldPtr<Scalar> manifold, Vector coords)
      : manifold_(std::move(manifold)), coords_(std::move(coords)) {
    if (!manifold_) throw UsageError("point requires a manifold");
    manifold_->validate_point(coords_);
  }

  const Vector& coords() const { return coords_; }
  Scalar operator[](Eigen::Index i) const { return coords_[i]; }
  Eigen::Index dim() const { return coords_.size(); }
  const Manifold<Scalar>& manifold() const { return *manifold_; }
  const ManifoldPtr<Scalar>& manifold_ptr() const { return manifold_; }

 private:
  ManifoldPtr<Scalar> manifold_;
  Vector coords_;
};

template <typename Scalar>
class Tangent {
 public:
  using Vector = typename Manifold<Scalar>::Vector;

  Tangent(Point<Scalar> base, Vector coords) : base_(std::move(base)), coords_(std::move(coords)) {
    if (coords_.size() != base_.dim()) throw UsageError("tangent dimension does not match base");
  }

  const Point<Scalar>& base() const { return base_; }
  const Vector& coords() const { return coords_; }

 private:
  Point<Scalar> base_;
  Vector coords_;
};

namespace detail {

template <typename Scalar>
void require_same_manifold(const Point<Scalar>& x, const Point<Scalar>& y) {
  if (x.manifold_ptr() != y.manifold_ptr() && !(x.manifold() == y.manifold()))
    throw UsageError("points live on different manifolds");
}

template <typename Scalar>
void require_based_at(const Point<Scalar>& x, const Tangent<Scalar>& v) {
  require_same_manifold(x, v.base());
  if (x.coords() != v.base().coords()) throw UsageError("tangent vector is not based at this point");
}

}  // namespace detail

template <typename Scalar>
Scalar distance(const Point<Scalar>& x, const Point<Scalar>& y) {
  detail::require_same_manifold(x, y);
  return x.manifold().distance(x.coords(), y.coords());
}

template <typename Scalar>
Scalar squared_distance(const Point<Scalar>& x, const Point<Scalar>& y) {
  detail::require_same_manifold(x, y);
  return x.manifold().squared_distance(x.coords(), y.coords());
}

/// Point reached at time t along the geodesic leaving x with velocity v.
template <typename Scalar>
Point<Scalar> exp_map(const Point<Scalar>& x, const Tangent<Scalar>& v, Scalar t = Scalar(1)) {
  detail::require_based_at(x, v);
  return {x.manifold_ptr(), x.manifold().exp(x.coords(), v.coords(), t)};
}

template <typename Scalar>
Tangent<Scalar> log_map(const Point<Scalar>& x, const Point<Scalar>& y) {
  detail::require_same_manifold(x, y);
  return {x, x.manifold().log(x.coords(), y.coords())};
}

template <typename Scalar>
Scalar inner(const Point<Scalar>& x, const Tangent<Scalar>& u, const Tangent<Scalar>& v) {
  detail::require_based_at(x, u);
  detail::require_based_at(x, v);
  return x.manifold().inner(x.coords(), u.coords(), v.coords());
}

template <typename Scalar>
Scalar norm(const Tangent<Scalar>& v) {
  const auto& x = v.base();
  using std::sqrt;
  return sqrt(x.manifold().inner(x.coords(), v.coords(), v.coords()));
}

template <typename Scalar>
Tangent<Scalar> parallel_transport(const Point<Scalar>& x, const Point<Scalar>& y,
                                   const Tangent<Scalar>& v) {
  detail::require_based_at(x, v);
  detail::require_same_manifold(x, y);
  return {y, x.manifold().transport(x.coords(), y.coords(), v.coords())};
}

template <typename Scalar>
typename Point<Scalar>::Vector to_chart(const Point<Scalar>& x) {
  return x.manifold().to_chart(x.coords());
}

template <typename Scalar>
Point<Scalar> from_chart(const ManifoldPtr<Scalar>& manifold,
                         const typename Point<Scalar>::Vector& u) {
  if (u.size() != manifold->dim()) throw UsageError("chart vector dimension does not match manifold");
  if (!u.allFinite()) throw UsageError("chart coordinates must be finite");
  return {manifold, manifold->from_chart(u)};
}

/// Tangent at x whose chart representation is w.
template <typename Scalar>
Tangent<Scalar> tangent_from_chart(const Point<Scalar>& x, const typename Point<Scalar>::Vector& w) {
  return {x, x.manifold().push_forward(x.coords(), w)};
}

using Manifoldd = Manifold<double>;
using Pointd = Point<double>;
using Tangentd = Tangent<double>;

}  // namespace heg
