#ifndef MINREG_FUNCMODEL_HPP
#define MINREG_FUNCMODEL_HPP

#include "minreg/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace minreg {

/// weight * (x - m)^T Q (x - m) with Q symmetric PSD.
struct QuadraticTerm {
  Matrix Q;
  Vector m;
  double weight = 1.0;

  QuadraticTerm(Matrix q, Vector center, double w = 1.0)
      : Q(std::move(q)), m(std::move(center)), weight(w) {
    const auto n = m.size();
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "quadratic term needs dimension >= 1");
    if (Q.rows() != n || Q.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "quadratic term Q must be " + std::to_string(n) +
                                                    "x" + std::to_string(n));
    }
    if (!Q.allFinite()) throw Error(ErrorKind::InvalidArgument, "quadratic term Q is not finite");
    require_finite(m, "quadratic term center");
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw Error(ErrorKind::InvalidArgument, "quadratic term weight must be positive");
    }
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorKind::InvalidArgument, "quadratic term Q is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      throw Error(ErrorKind::InvalidArgument, "quadratic term Q is not positive semidefinite");
    }
  }

  static QuadraticTerm isotropic(const Vector& center, double w = 1.0) {
    return QuadraticTerm(Matrix::Identity(center.size(), center.size()), center, w);
  }
};

/// A declared nonsmooth point p with finite generators g_1..g_k. It contributes
/// the polyhedral term max_i <g_i, x - p>, whose subdifferential at p is the
/// convex hull of the generators.
struct KinkSet {
  Vector point;
  std::vector<Vector> generators;
};

/// Convex hull of finitely many generators; a singleton at smooth points.
struct SubdifferentialSet {
  std::vector<Vector> generators;

  bool singleton() const noexcept { return generators.size() == 1; }
};

class KnownFunction {
 public:
  explicit KnownFunction(std::vector<QuadraticTerm> terms, std::vector<KinkSet> kinks = {})
      : terms_(std::move(terms)), kinks_(std::move(kinks)) {
    if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "known function needs a term");
    const auto n = terms_.front().m.size();
    for (const auto& t : terms_) {
      if (t.m.size() != n) throw Error(ErrorKind::DimensionMismatch, "terms differ in dimension");
    }
    for (const auto& k : kinks_) {
      if (k.point.size() != n) {
        throw Error(ErrorKind::DimensionMismatch, "kink point dimension differs from terms");
      }
      require_finite(k.point, "kink point");
      if (k.generators.empty()) {
        throw Error(ErrorKind::InvalidArgument, "kink generator list must be nonempty");
      }
      for (const auto& g : k.generators) {
        if (g.size() != n) throw Error(ErrorKind::DimensionMismatch, "kink generator dimension");
        require_finite(g, "kink generator");
      }
    }
    hessian_ = Matrix::Zero(n, n);
    linear_ = Vector::Zero(n);
    for (const auto& t : terms_) {
      hessian_ += 2.0 * t.weight * t.Q;
      linear_ += 2.0 * t.weight * (t.Q * t.m);
    }
  }

  Eigen::Index dimension() const noexcept { return linear_.size(); }
  const std::vector<QuadraticTerm>& terms() const noexcept { return terms_; }
  const std::vector<KinkSet>& kinks() const noexcept { return kinks_; }
  bool smooth() const noexcept { return kinks_.empty(); }

  /// Hessian H and vector b of the quadratic part: grad = H x - b.
  const Matrix& hessian() const noexcept { return hessian_; }
  const Vector& linear_part() const noexcept { return linear_; }

  double value(const Vector& x) const {
    check_dim(x);
    double v = 0.0;
    for (const auto& t : terms_) {
      const Vector r = x - t.m;
      v += t.weight * r.dot(t.Q * r);
    }
    for (const auto& k : kinks_) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& g : k.generators) best = std::max(best, g.dot(x - k.point));
      v += best;
    }
    return v;
  }

  Vector smooth_gradient(const Vector& x) const {
    check_dim(x);
    Vector grad = Vector::Zero(dimension());
    for (const auto& t : terms_) grad += 2.0 * t.weight * (t.Q * (x - t.m));
    return grad;
  }

  bool is_kink_point(const Vector& x) const {
    check_dim(x);
    for (const auto& k : kinks_) {
      if (coincides(x, k.point)) return true;
    }
    return false;
  }

  /// True at declared kink points and wherever a polyhedral term has a tie.
  bool is_nonsmooth(const Vector& x) const {
    check_dim(x);
    for (const auto& k : kinks_) {
      if (coincides(x, k.point) || active_generators(k, x).size() > 1) return true;
    }
    return false;
  }

  Vector gradient(const Vector& x) const {
    if (is_nonsmooth(x)) {
      throw Error(ErrorKind::KinkPoint, "gradient undefined here; use subdifferential()");
    }
    Vector grad = smooth_gradient(x);
    for (const auto& k : kinks_) grad += active_generators(k, x).front();
    return grad;
  }

  SubdifferentialSet subdifferential(const Vector& x) const {
    std::vector<Vector> acc{smooth_gradient(x)};
    for (const auto& k : kinks_) {
      const auto active = coincides(x, k.point) ? distinct(k.generators) : active_generators(k, x);
      std::vector<Vector> next;
      next.reserve(acc.size() * active.size());
      for (const auto& base : acc) {
        for (const auto& g : active) next.push_back(base + g);
      }
      acc = std::move(next);
    }
    return SubdifferentialSet{std::move(acc)};
  }

  /// Same function with every weight and kink generator multiplied by lambda.
  KnownFunction scaled(double lambda) const {
    if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
    std::vector<QuadraticTerm> terms;
    for (const auto& t : terms_) terms.emplace_back(t.Q, t.m, t.weight * lambda);
    std::vector<KinkSet> kinks;
    for (const auto& k : kinks_) {
      KinkSet s{k.point, {}};
      for (const auto& g : k.generators) s.generators.push_back(lambda * g);
      kinks.push_back(std::move(s));
    }
    return KnownFunction(std::move(terms), std::move(kinks));
  }

 private:
  void check_dim(const Vector& x) const {
    if (x.size() != dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                                    ", function has " +
                                                    std::to_string(dimension()));
    }
  }

  static bool coincides(const Vector& x, const Vector& p) {
    return (x - p).norm() <= 1e-12 * std::max(1.0, p.norm());
  }

  static std::vector<Vector> distinct(const std::vector<Vector>& gens) {
    std::vector<Vector> out;
    for (const auto& g : gens) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& h) { return h == g; });
      if (!seen) out.push_back(g);
    }
    return out;
  }

  static std::vector<Vector> active_generators(const KinkSet& k, const Vector& x) {
    const Vector rel = x - k.point;
    double best = -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (const auto& g : k.generators) {
      best = std::max(best, g.dot(rel));
      scale = std::max(scale, g.norm() * rel.norm());
    }
    std::vector<Vector> active;
    for (const auto& g : k.generators) {
      if (g.dot(rel) >= best - 1e-12 * scale) active.push_back(g);
    }
    return distinct(active);
  }

  std::vector<QuadraticTerm> terms_;
  std::vector<KinkSet> kinks_;
  Matrix hessian_;
  Vector linear_;
};

/// Max over coordinates of |central difference - analytic gradient|, relative
/// to max(1, |gradient|).
inline double finite_difference_check(const KnownFunction& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  const Vector grad = f.gradient(x);
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f.value(probe);
    probe[i] = x[i] - h;
    const double down = f.value(probe);
    probe[i] = x[i];
    worst = std::max(worst, std::abs((up - down) / (2.0 * h) - grad[i]));
  }
  return worst / std::max(1.0, grad.norm());
}

}  // namespace minreg

#endif  // MINREG_FUNCMODEL_HPP
