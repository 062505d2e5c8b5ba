#ifndef MINREG_ORACLE_HPP
#define MINREG_ORACLE_HPP

#include "minreg/membership.hpp"
#include "minreg/scanner.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace minreg {

/// f^u(x) = (sigma_u / 2) |x - center|^2
struct UnknownQuadratic {
  Vector center;
  double sigma_u = 1.0;

  double value(const Vector& x) const { return 0.5 * sigma_u * (x - center).squaredNorm(); }
  Vector gradient(const Vector& x) const { return sigma_u * (x - center); }
};

struct OracleSample {
  UnknownQuadratic unknown;
  Vector joint_minimizer;
  double stationarity = 0.0;  // distance from 0 to the subdifferential of the sum
  MembershipVerdict verdict;
};

/// SplitMix64 finalizer; derives independent per-trial seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return mix_seed(mix_seed(master) ^ static_cast<std::uint64_t>(trial));
}

/// Uniform point of the closed ball: Gaussian direction times radius * U^(1/n).
template <class Rng>
Vector sample_in_ball(const Ball& ball, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = ball.dimension();
  Vector dir(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal(rng);
  } while (!(dir.norm() > 0.0));
  const double radius = ball.radius() * std::pow(unit(rng), 1.0 / static_cast<double>(n));
  return ball.center() + radius * dir.normalized();
}

inline UnknownQuadratic sample_unknown(const UncertaintySet& set, double sigma, std::uint64_t seed,
                                       std::pair<double, double> multiplier_range) {
  const auto [lo, hi] = multiplier_range;
  if (!(lo >= 1.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::InvalidArgument, "multiplier range must satisfy 1 <= lo <= hi");
  }
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  std::mt19937_64 rng(seed);
  UnknownQuadratic u;
  if (const auto* ball = set.ball()) {
    u.center = sample_in_ball(*ball, rng);
  } else {
    const auto& pts = set.point_set()->points();
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    u.center = pts[pick(rng)];
  }
  if (lo == hi) {
    u.sigma_u = sigma * lo;
  } else {
    u.sigma_u = sigma * std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return u;
}

/// Closed-form minimizer of a smooth f^k plus f^u:
/// (H + sigma_u I) x = b + sigma_u * center.
inline Vector minimize_sum(const KnownFunction& f, const UnknownQuadratic& u) {
  if (!f.smooth()) {
    throw Error(ErrorKind::KinkPoint, "minimize_sum needs a smooth model; use the iterative solver");
  }
  require_same_dimension(u.center, f.linear_part(), "minimize_sum");
  const auto n = f.dimension();
  const Matrix system = f.hessian() + u.sigma_u * Matrix::Identity(n, n);
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalDomain, "joint Hessian is not positive definite");
  }
  return llt.solve(f.linear_part() + u.sigma_u * u.center);
}

namespace detail {

// Euclidean projection onto the probability simplex.
inline Vector project_simplex(const Vector& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cumulative += s[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

}  // namespace detail

/// Distance from y to the convex hull of the generators (accelerated projected
/// gradient over barycentric weights).
inline double distance_to_hull(const std::vector<Vector>& generators, const Vector& y) {
  if (generators.empty()) throw Error(ErrorKind::InvalidArgument, "empty generator set");
  if (generators.size() == 1) return (generators.front() - y).norm();
  const auto k = static_cast<Eigen::Index>(generators.size());
  Matrix V(y.size(), k);
  for (Eigen::Index i = 0; i < k; ++i) V.col(i) = generators[static_cast<std::size_t>(i)];
  const Matrix gram = V.transpose() * V;
  const double lipschitz = std::max(1e-300, Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff());
  Vector lambda = Vector::Constant(k, 1.0 / static_cast<double>(k));
  Vector momentum = lambda;
  double t = 1.0;
  double best = (V * lambda - y).norm();
  for (int it = 0; it < 20000 && best > 0.0; ++it) {
    const Vector grad = V.transpose() * (V * momentum - y);
    const Vector next = detail::project_simplex(momentum - grad / lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = next + ((t - 1.0) / t_next) * (next - lambda);
    lambda = next;
    t = t_next;
    best = std::min(best, (V * lambda - y).norm());
  }
  return best;
}

/// Distance from 0 to the subdifferential of f^k + f^u at x.
inline double stationarity(const KnownFunction& f, const UnknownQuadratic& u, const Vector& x) {
  return distance_to_hull(f.subdifferential(x).generators, -u.gradient(x));
}

struct IterativeOptions {
  std::size_t max_iterations = 20000;
};

/// Minimizer of f^k + f^u for models with kinks. Subgradient steps locate the
/// active face of the polyhedral part; the face is then solved exactly from
/// its KKT system and accepted once the stationarity residual is below tol.
inline Vector minimize_sum_iterative(const KnownFunction& f, const UnknownQuadratic& u, double tol,
                                     const IterativeOptions& opts = {}) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  require_same_dimension(u.center, f.linear_part(), "minimize_sum_iterative");
  const auto n = f.dimension();
  const Matrix M = f.hessian() + u.sigma_u * Matrix::Identity(n, n);
  const Vector rhs = f.linear_part() + u.sigma_u * u.center;

  auto objective = [&](const Vector& x) { return f.value(x) + u.value(x); };
  auto any_subgradient = [&](const Vector& x) {
    Vector s = f.smooth_gradient(x) + u.gradient(x);
    for (const auto& k : f.kinks()) {
      const Vector* arg = &k.generators.front();
      for (const auto& g : k.generators) {
        if (g.dot(x - k.point) > arg->dot(x - k.point)) arg = &g;
      }
      s += *arg;
    }
    return s;
  };

  Vector x = Eigen::LLT<Matrix>(M).solve(rhs);
  Vector best_x = x;
  double best_value = objective(x);
  for (std::size_t k = 0; k < opts.max_iterations; ++k) {
    x -= any_subgradient(x) / (u.sigma_u * static_cast<double>(k + 1));
    const double v = objective(x);
    if (v < best_value) {
      best_value = v;
      best_x = x;
    }
  }

  // Candidate faces: generators within a gap threshold of the max are tied.
  std::vector<Vector> candidates{best_x};
  for (const auto& k : f.kinks()) candidates.push_back(k.point);
  const double thresholds[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  for (double thr : thresholds) {
    // Linear term from the first tied generator of each kink, equality rows
    // tying the rest to it.
    Vector linear = rhs;
    std::vector<Vector> rows;
    std::vector<double> rhs_rows;
    for (const auto& k : f.kinks()) {
      const Vector rel = best_x - k.point;
      double top = -std::numeric_limits<double>::infinity();
      double scale = 1.0;
      for (const auto& g : k.generators) {
        top = std::max(top, g.dot(rel));
        scale = std::max(scale, g.norm() * std::max(1.0, rel.norm()));
      }
      std::vector<const Vector*> tied;
      for (const auto& g : k.generators) {
        if (g.dot(rel) >= top - thr * scale) tied.push_back(&g);
      }
      linear -= *tied.front();
      for (std::size_t i = 1; i < tied.size(); ++i) {
        const Vector diff = *tied[i] - *tied.front();
        if (diff.norm() == 0.0) continue;
        rows.push_back(diff);
        rhs_rows.push_back(diff.dot(k.point));
      }
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Matrix kkt = Matrix::Zero(n + m, n + m);
    Vector kkt_rhs(n + m);
    kkt.topLeftCorner(n, n) = M;
    kkt_rhs.head(n) = linear;
    for (Eigen::Index i = 0; i < m; ++i) {
      kkt.block(n + i, 0, 1, n) = rows[static_cast<std::size_t>(i)].transpose();
      kkt.block(0, n + i, n, 1) = rows[static_cast<std::size_t>(i)];
      kkt_rhs[n + i] = rhs_rows[static_cast<std::size_t>(i)];
    }
    candidates.push_back(kkt.completeOrthogonalDecomposition().solve(kkt_rhs).head(n));
  }

  const Vector* winner = nullptr;
  double winner_residual = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (!c.allFinite()) continue;
    const double residual = stationarity(f, u, c);
    if (residual < winner_residual) {
      winner_residual = residual;
      winner = &c;
    }
  }
  if (winner == nullptr || winner_residual > tol) {
    throw Error(ErrorKind::NonConvergence, "stationarity residual " + std::to_string(winner_residual) +
                                               " above tolerance");
  }
  return *winner;
}

struct NecessityConfig {
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  std::pair<double, double> multiplier_range{1.0, 4.0};
  std::optional<double> classify_sigma;  // deliberately violate the hypothesis when set
  EvalOptions options{};
  std::size_t threads = detail::default_threads();
};

struct NecessityReport {
  std::size_t trials = 0;
  std::size_t members = 0;        // exterior minimizers flagged member
  std::size_t inside_set = 0;     // minimizers inside the uncertainty set
  std::size_t falsifications = 0; // true minimizers flagged non-member
  std::optional<double> worst_margin;  // min of (-sigma - best_score) over exterior trials
  double max_stationarity = 0.0;
  std::optional<OracleSample> first_falsification;

  bool passed() const noexcept { return falsifications == 0; }
};

/// Samples admissible unknown functions, computes the exact joint minimizer,
/// and checks that every one of them is classified member.
inline NecessityReport validate_necessity(const KnownFunction& f, const UncertaintySet& set,
                                          double sigma, const NecessityConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  const UncertaintySet classify_set = set.with_sigma(config.classify_sigma.value_or(sigma));
  std::vector<OracleSample> samples(config.trials);
  detail::parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    OracleSample s;
    s.unknown = sample_unknown(set, sigma, trial_seed(config.seed, trial), config.multiplier_range);
    s.joint_minimizer = f.smooth() ? minimize_sum(f, s.unknown)
                                   : minimize_sum_iterative(f, s.unknown, 1e-8);
    s.stationarity = f.smooth() ? (f.gradient(s.joint_minimizer) + s.unknown.gradient(s.joint_minimizer)).norm()
                                : stationarity(f, s.unknown, s.joint_minimizer);
    s.verdict = classify_point(f, s.joint_minimizer, classify_set, config.options);
    samples[trial] = std::move(s);
  });

  NecessityReport report;
  report.trials = config.trials;
  const double threshold = -classify_set.sigma();
  for (const auto& s : samples) {
    report.max_stationarity = std::max(report.max_stationarity, s.stationarity);
    if (s.verdict.basis != Basis::Condition) {
      ++report.inside_set;
      continue;
    }
    if (s.verdict.best_score) {
      const double margin = threshold - *s.verdict.best_score;
      if (!report.worst_margin || margin < *report.worst_margin) report.worst_margin = margin;
    }
    if (s.verdict.member) {
      ++report.members;
    } else {
      ++report.falsifications;
      if (!report.first_falsification) report.first_falsification = s;
    }
  }
  return report;
}

}  // namespace minreg

#endif  // MINREG_ORACLE_HPP
