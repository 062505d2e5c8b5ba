#ifndef MINREG_GEOMETRY_HPP
#define MINREG_GEOMETRY_HPP

#include "minreg/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace minreg {

/// Closed ball B(center, radius); the structured uncertainty set.
class Ball {
 public:
  Ball(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
    require_finite(center_, "ball center");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
      throw Error(ErrorKind::InvalidArgument, "ball radius must be positive and finite");
    }
  }

  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  Eigen::Index dimension() const noexcept { return center_.size(); }

  double distance_to_center(const Vector& x) const {
    require_same_dimension(x, center_, "ball distance");
    return (x - center_).norm();
  }

  bool contains(const Vector& x) const { return distance_to_center(x) <= radius_; }

 private:
  Vector center_;
  double radius_;
};

/// The residue of the isometric reduction: the ball-case score depends on the
/// query only through these three numbers.
struct CanonicalFrame {
  double d = 0.0;       // distance from the query point to the ball center
  double alpha = 0.0;   // angle between the subgradient and (center - query), in [0, pi]
  double g_norm = 0.0;
};

namespace detail {

inline constexpr double kTrigArgTolerance = 1e-9;

inline double checked_unit_interval(double arg, const char* what) {
  if (!std::isfinite(arg) || std::abs(arg) > 1.0 + kTrigArgTolerance) {
    throw Error(ErrorKind::NumericalDomain,
                std::string(what) + " argument out of [-1, 1]: " + std::to_string(arg));
  }
  return std::clamp(arg, -1.0, 1.0);
}

}  // namespace detail

inline double safe_acos(double arg) { return std::acos(detail::checked_unit_interval(arg, "acos")); }
inline double safe_asin(double arg) { return std::asin(detail::checked_unit_interval(arg, "asin")); }

/// u(x1, x2) = (x1 - x2) / |x1 - x2|
inline Vector unit_vector(const Vector& x1, const Vector& x2) {
  require_same_dimension(x1, x2, "unit_vector");
  Vector diff = x1 - x2;
  const double n = diff.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::CoincidentPoints, "unit_vector of identical points");
  return diff / n;
}

/// Kahan's form 2 atan2(|u|v| - v|u||, |u|v| + v|u||): unlike acos of the
/// normalized dot product it stays accurate near 0 and pi.
inline double angle_between(const Vector& u, const Vector& v) {
  require_same_dimension(u, v, "angle_between");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw Error(ErrorKind::ZeroVector, "angle with a zero vector");
  const Vector a = u * nv;
  const Vector b = v * nu;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

/// Reduces (g, x*, ball) to the frame (d, alpha, |g|). Requires x* strictly
/// outside the closed ball and g != 0.
inline CanonicalFrame canonicalize(const Vector& g, const Vector& x_star, const Ball& ball) {
  require_same_dimension(g, x_star, "canonicalize");
  const double d = ball.distance_to_center(x_star);
  if (!(d > ball.radius())) {
    throw Error(ErrorKind::InsideBall, "canonicalize needs the query strictly outside the ball");
  }
  const double g_norm = g.norm();
  if (!(g_norm > 0.0)) throw Error(ErrorKind::ZeroVector, "canonicalize with zero subgradient");
  return CanonicalFrame{d, angle_between(g, ball.center() - x_star), g_norm};
}

/// Central angle from z1 to the tangent point: arccos(eps0 / d).
inline double theta_max(double d, double eps0) {
  if (!(d > eps0) || !(eps0 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "theta_max requires d > eps0 > 0");
  }
  return safe_acos(eps0 / d);
}

inline double theta_max(const CanonicalFrame& frame, const Ball& ball) {
  return theta_max(frame.d, ball.radius());
}

/// Distance from the query point to the boundary point at central angle theta.
/// Law of cosines rewritten as (d - eps0)^2 + 4 d eps0 sin^2(theta / 2), which
/// avoids cancellation when x* is close to the sphere.
inline double chord_length(double d, double eps0, double theta) {
  if (!(d > eps0) || !(eps0 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "chord_length requires d > eps0 > 0");
  }
  const double gap = d - eps0;
  const double s = std::sin(0.5 * theta);
  return std::sqrt(gap * gap + 4.0 * d * eps0 * s * s);
}

/// z1: the point of the closed ball nearest to x*.
inline Vector nearest_boundary_point(const Vector& x_star, const Ball& ball) {
  if (ball.contains(x_star)) {
    throw Error(ErrorKind::InsideBall, "nearest_boundary_point needs the query outside the ball");
  }
  return ball.center() + ball.radius() * unit_vector(x_star, ball.center());
}

/// Whether boundary point x sees x* without the segment re-entering the ball.
/// Closed test: the tangent circle counts as visible.
inline bool visible_cap_contains(const Vector& x, const Vector& x_star, const Ball& ball) {
  require_same_dimension(x, x_star, "visible_cap_contains");
  const double eps0 = ball.radius();
  if (!(ball.distance_to_center(x_star) > eps0)) {
    throw Error(ErrorKind::InsideBall, "visible_cap_contains needs the query outside the ball");
  }
  const Vector rel = x - ball.center();
  if (std::abs(rel.norm() - eps0) > 1e-9 * std::max(1.0, eps0)) {
    throw Error(ErrorKind::NotOnBoundary, "visible_cap_contains needs a boundary point");
  }
  return rel.dot(x_star - ball.center()) >= eps0 * eps0;
}

/// Some unit vector orthogonal to unit vector e (Gram-Schmidt on the axis
/// least aligned with e).
inline Vector orthogonal_unit(const Vector& e) {
  Eigen::Index axis = 0;
  e.cwiseAbs().minCoeff(&axis);
  Vector w = Vector::Unit(e.size(), axis);
  w -= w.dot(e) * e;
  return w.normalized();
}

/// Boundary point at central angle theta from z1, rotated toward the unit
/// direction `toward` (orthogonal to the center-to-query axis).
inline Vector cap_point(const Vector& x_star, const Ball& ball, double theta, const Vector& toward) {
  const Vector e1 = unit_vector(x_star, ball.center());
  return ball.center() + ball.radius() * (std::cos(theta) * e1 + std::sin(theta) * toward);
}

/// Boundary points of the ball that are visible from x*. In the plane the cap
/// is swept uniformly over [-theta_max, theta_max]; in higher dimensions the
/// angle and the orthogonal direction are drawn from a seeded generator.
/// Points failing visible_cap_contains (roundoff at the tangent circle) are
/// dropped.
template <class Rng>
std::vector<Vector> visible_cap_samples(const Vector& x_star, const Ball& ball, std::size_t count,
                                        Rng& rng) {
  if (x_star.size() < 2) throw Error(ErrorKind::InvalidArgument, "cap sampling needs n >= 2");
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "cap sampling needs count >= 2");
  const double d = ball.distance_to_center(x_star);
  const double tmax = theta_max(d, ball.radius());
  const Vector e1 = unit_vector(x_star, ball.center());
  std::vector<Vector> out;
  out.reserve(count);
  if (x_star.size() == 2) {
    const Vector e2 = make_vector({-e1[1], e1[0]});
    for (std::size_t k = 0; k < count; ++k) {
      const double theta = -tmax + 2.0 * tmax * static_cast<double>(k) / static_cast<double>(count - 1);
      out.push_back(cap_point(x_star, ball, theta, e2));
    }
  } else {
    std::uniform_real_distribution<double> angle(0.0, tmax);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < count; ++k) {
      Vector w(x_star.size());
      for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
      w -= w.dot(e1) * e1;
      if (!(w.norm() > 1e-12)) w = orthogonal_unit(e1);
      out.push_back(cap_point(x_star, ball, angle(rng), w.normalized()));
    }
  }
  std::erase_if(out, [&](const Vector& p) { return !visible_cap_contains(p, x_star, ball); });
  return out;
}

}  // namespace minreg

#endif  // MINREG_GEOMETRY_HPP
