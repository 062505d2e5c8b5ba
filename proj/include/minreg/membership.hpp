#ifndef MINREG_MEMBERSHIP_HPP
#define MINREG_MEMBERSHIP_HPP

#include "minreg/funcmodel.hpp"
#include "minreg/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <variant>
#include <vector>

namespace minreg {

/// Finite candidate set for the unknown minimizer.
class PointSet {
 public:
  explicit PointSet(std::vector<Vector> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorKind::InvalidArgument, "point set must be nonempty");
    for (const auto& p : points_) {
      require_same_dimension(p, points_.front(), "point set");
      require_finite(p, "point set member");
    }
  }

  const std::vector<Vector>& points() const noexcept { return points_; }
  Eigen::Index dimension() const noexcept { return points_.front().size(); }

  bool contains(const Vector& x) const {
    for (const auto& p : points_) {
      require_same_dimension(x, p, "point set membership");
      if (x == p) return true;
    }
    return false;
  }

 private:
  std::vector<Vector> points_;
};

/// The compact set known to hold the unknown minimizer, plus the strong
/// convexity modulus of the unknown function.
class UncertaintySet {
 public:
  using Shape = std::variant<Ball, PointSet>;

  UncertaintySet(Shape shape, double sigma) : shape_(std::move(shape)), sigma_(sigma) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
      throw Error(ErrorKind::InvalidArgument, "sigma must be positive and finite");
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  double sigma() const noexcept { return sigma_; }
  const Ball* ball() const noexcept { return std::get_if<Ball>(&shape_); }
  const PointSet* point_set() const noexcept { return std::get_if<PointSet>(&shape_); }

  Eigen::Index dimension() const {
    return std::visit([](const auto& s) { return s.dimension(); }, shape_);
  }

  bool contains(const Vector& x) const {
    return std::visit([&](const auto& s) { return s.contains(x); }, shape_);
  }

  UncertaintySet with_sigma(double sigma) const { return UncertaintySet(shape_, sigma); }

 private:
  Shape shape_;
  double sigma_;
};

struct Witness {
  Vector x_u;  // empty when the verdict came from a bare CanonicalFrame
  Vector g;    // empty when the verdict came from a bare CanonicalFrame
  std::optional<double> theta;
  bool truncated = false;  // sweep stopped early; best_score is the exit score
};

enum class Basis {
  Interior,     // strictly inside the set
  SetBoundary,  // on the ball sphere or equal to a point of a finite set
  Condition,    // decided by the necessary condition
};

struct MembershipVerdict {
  bool member = false;
  std::optional<double> best_score;
  std::optional<Witness> witness;
  Basis basis = Basis::Condition;
};

struct EvalOptions {
  std::size_t theta_steps = 2048;
  double slack = 1e-9;
  bool early_exit = true;
  std::size_t boundary_samples = 4096;  // evaluate_general on a ball
  std::uint64_t boundary_seed = 0x9e3779b97f4a7c15ULL;
};

/// <g, u(x*, x_u)> / |x* - x_u|
inline double pair_score(const Vector& g, const Vector& x_star, const Vector& x_u) {
  require_same_dimension(g, x_star, "pair_score");
  const Vector diff = x_star - x_u;
  const double r = diff.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::CoincidentPoints, "pair_score with x* == x_u");
  return g.dot(diff) / (r * r);
}

/// Minimizes pair_score over generators x candidates. With `filter`, pairs
/// with <g, u> >= 0 are dropped before minimizing.
inline MembershipVerdict evaluate_candidates(const std::vector<Vector>& generators,
                                             const Vector& x_star,
                                             const std::vector<Vector>& candidates, double sigma,
                                             const EvalOptions& options, bool filter = true) {
  MembershipVerdict verdict;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : generators) {
    for (const auto& x_u : candidates) {
      const Vector diff = x_star - x_u;
      const double r = diff.norm();
      if (!(r > 0.0)) throw Error(ErrorKind::InsideSet, "candidate coincides with x*");
      const double inner = g.dot(diff) / r;
      if (filter && !(inner < 0.0)) continue;
      const double score = inner / r;
      if (score < best) {
        best = score;
        verdict.witness = Witness{x_u, g, std::nullopt, false};
      }
    }
  }
  if (verdict.witness) {
    verdict.best_score = best;
    verdict.member = best <= -sigma + options.slack;
  }
  return verdict;
}

/// Ball case in the reduced frame: sweep the central angle from z1 toward the
/// tangent point on the great circle spanned by g and the center direction.
inline MembershipVerdict evaluate_ball(const CanonicalFrame& frame, double eps0, double sigma,
                                       const EvalOptions& options) {
  if (options.theta_steps < 2) throw Error(ErrorKind::InvalidArgument, "theta_steps must be >= 2");
  if (!(frame.d > eps0) || !(eps0 > 0.0)) {
    throw Error(ErrorKind::InsideBall, "evaluate_ball needs d > eps0 > 0");
  }
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  MembershipVerdict verdict;
  const double d = frame.d;
  const double alpha = frame.alpha;
  const double threshold = -sigma + options.slack;

  // The half-space of descent directions misses the ball entirely.
  if (alpha >= std::numbers::pi / 2.0 + safe_asin(eps0 / d)) return verdict;

  auto score_at = [&](double theta) {
    const double r = chord_length(d, eps0, theta);
    const double phi = safe_asin(eps0 * std::sin(theta) / r);
    return -frame.g_norm * std::cos(alpha - phi) / r;
  };

  // No boundary point is closer than d - eps0, so |g| / (d - eps0) bounds the
  // achievable magnitude; skip the sweep when even that cannot reach -sigma.
  if (options.early_exit && -frame.g_norm / (d - eps0) > threshold) {
    verdict.best_score = score_at(0.0);
    verdict.witness = Witness{{}, {}, 0.0, true};
    return verdict;
  }

  const double tmax = theta_max(d, eps0);
  const double last = static_cast<double>(options.theta_steps - 1);
  double best = std::numeric_limits<double>::infinity();
  double best_theta = 0.0;
  for (std::size_t k = 0; k < options.theta_steps; ++k) {
    const double theta = tmax * static_cast<double>(k) / last;
    const double score = score_at(theta);
    if (score < best) {
      best = score;
      best_theta = theta;
    }
    if (options.early_exit && score <= threshold) {
      verdict.member = true;
      verdict.best_score = score;
      verdict.witness = Witness{{}, {}, theta, k + 1 < options.theta_steps};
      return verdict;
    }
  }
  verdict.best_score = best;
  verdict.member = best <= threshold;
  verdict.witness = Witness{{}, {}, best_theta, false};
  return verdict;
}

namespace detail {

inline std::vector<Vector> general_candidates(const Vector& x_star, const UncertaintySet& set,
                                              const EvalOptions& options) {
  if (const auto* pts = set.point_set()) return pts->points();
  std::mt19937_64 rng(options.boundary_seed);
  return visible_cap_samples(x_star, *set.ball(), options.boundary_samples, rng);
}

// Boundary point at the witness angle, in original coordinates.
inline Vector ball_witness_point(const Vector& g, const Vector& x_star, const Ball& ball,
                                 double theta) {
  const Vector e1 = unit_vector(x_star, ball.center());
  Vector toward = g - g.dot(e1) * e1;
  if (toward.norm() > 1e-12 * g.norm()) {
    toward.normalize();
  } else {
    toward = orthogonal_unit(e1);
  }
  return cap_point(x_star, ball, theta, toward);
}

}  // namespace detail

/// General compact set: minimizes pair_score over visible candidates and all
/// subdifferential generators. Balls are represented by visible-cap samples.
inline MembershipVerdict evaluate_general(const KnownFunction& f, const Vector& x_star,
                                          const UncertaintySet& set, const EvalOptions& options) {
  require_same_dimension(x_star, Vector(set.dimension()), "evaluate_general");
  if (set.contains(x_star)) {
    throw Error(ErrorKind::InsideSet, "evaluate_general needs x* outside the set");
  }
  const auto sub = f.subdifferential(x_star);
  return evaluate_candidates(sub.generators, x_star, detail::general_candidates(x_star, set, options),
                             set.sigma(), options);
}

/// Dispatcher: interior rule inside the closed set, otherwise the necessary
/// condition per subdifferential generator.
inline MembershipVerdict classify_point(const KnownFunction& f, const Vector& x_star,
                                        const UncertaintySet& set, const EvalOptions& options) {
  require_same_dimension(x_star, Vector(set.dimension()), "classify_point");
  if (const auto* ball = set.ball()) {
    const double d = ball->distance_to_center(x_star);
    if (d < ball->radius()) return MembershipVerdict{true, std::nullopt, std::nullopt, Basis::Interior};
    if (d == ball->radius()) {
      return MembershipVerdict{true, std::nullopt, std::nullopt, Basis::SetBoundary};
    }
  } else if (set.point_set()->contains(x_star)) {
    return MembershipVerdict{true, std::nullopt, std::nullopt, Basis::SetBoundary};
  }

  const auto sub = f.subdifferential(x_star);
  MembershipVerdict result;
  for (const auto& g : sub.generators) {
    if (!(g.norm() > 0.0)) continue;
    MembershipVerdict v;
    if (const auto* ball = set.ball()) {
      v = evaluate_ball(canonicalize(g, x_star, *ball), ball->radius(), set.sigma(), options);
      if (v.witness) {
        v.witness->g = g;
        v.witness->x_u = detail::ball_witness_point(g, x_star, *ball, *v.witness->theta);
      }
    } else {
      v = evaluate_candidates({g}, x_star, set.point_set()->points(), set.sigma(), options);
    }
    if (v.best_score && (!result.best_score || *v.best_score < *result.best_score)) {
      result.best_score = v.best_score;
      result.witness = v.witness;
    }
    if (v.member) {
      result.member = true;
      if (options.early_exit) {
        result.best_score = v.best_score;
        result.witness = v.witness;
        return result;
      }
    }
  }
  return result;
}

}  // namespace minreg

#endif  // MINREG_MEMBERSHIP_HPP
