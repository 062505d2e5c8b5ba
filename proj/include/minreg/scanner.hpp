#ifndef MINREG_SCANNER_HPP
#define MINREG_SCANNER_HPP

#include "minreg/membership.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace minreg {

/// Axis-aligned lattice: counts[i] samples from lower[i] to upper[i] inclusive.
struct GridSpec {
  Vector lower;
  Vector upper;
  std::vector<std::size_t> counts;

  void validate() const {
    if (lower.size() < 1 || lower.size() != upper.size() ||
        counts.size() != static_cast<std::size_t>(lower.size())) {
      throw Error(ErrorKind::InvalidGrid, "lower, upper and counts must share one dimension");
    }
    if (!lower.allFinite() || !upper.allFinite()) {
      throw Error(ErrorKind::InvalidGrid, "grid bounds must be finite");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) throw Error(ErrorKind::InvalidGrid, "grid needs lower < upper");
      if (counts[static_cast<std::size_t>(i)] < 2) {
        throw Error(ErrorKind::InvalidGrid, "grid needs at least 2 samples per axis");
      }
    }
  }

  Eigen::Index dimension() const noexcept { return lower.size(); }

  std::size_t total() const {
    std::size_t n = 1;
    for (auto c : counts) n *= c;
    return n;
  }

  /// k-th of counts[axis] samples. Written as a weighted sum of the ends so a
  /// window symmetric about zero yields exactly mirrored coordinates.
  double coordinate(std::size_t axis, std::size_t k) const {
    const auto a = static_cast<Eigen::Index>(axis);
    const double last = static_cast<double>(counts[axis] - 1);
    const double kd = static_cast<double>(k);
    return ((last - kd) * lower[a] + kd * upper[a]) / last;
  }

  /// Point at flat index, row-major with the last axis fastest.
  Vector point(std::size_t index) const {
    Vector p(lower.size());
    for (std::size_t axis = counts.size(); axis-- > 0;) {
      p[static_cast<Eigen::Index>(axis)] = coordinate(axis, index % counts[axis]);
      index /= counts[axis];
    }
    return p;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.counts == b.counts && a.lower == b.lower && a.upper == b.upper;
  }
};

struct MaskMetadata {
  double sigma = 0.0;
  std::optional<double> eps0;             // ball sets
  std::optional<std::size_t> point_count; // finite sets
  std::size_t theta_steps = 0;
  double slack = 0.0;

  friend bool operator==(const MaskMetadata&, const MaskMetadata&) = default;
};

struct RegionMask {
  GridSpec grid;
  std::vector<std::uint8_t> membership;  // 0 or 1, grid enumeration order
  MaskMetadata metadata;

  std::size_t member_count() const {
    return static_cast<std::size_t>(std::count(membership.begin(), membership.end(), 1));
  }
};

inline std::vector<Vector> build_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<Vector> points;
  points.reserve(spec.total());
  for (std::size_t i = 0; i < spec.total(); ++i) points.push_back(spec.point(i));
  return points;
}

namespace detail {

// Runs body(i) for i in [0, n) on contiguous disjoint chunks.
inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::size_t default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

inline RegionMask scan_region(const KnownFunction& f, const UncertaintySet& set,
                              const GridSpec& spec, const EvalOptions& options,
                              std::size_t threads = detail::default_threads()) {
  spec.validate();
  if (spec.dimension() != set.dimension() || spec.dimension() != f.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "grid, function and set dimensions differ");
  }
  RegionMask mask{spec, std::vector<std::uint8_t>(spec.total(), 0), {}};
  mask.metadata.sigma = set.sigma();
  if (const auto* ball = set.ball()) {
    mask.metadata.eps0 = ball->radius();
  } else {
    mask.metadata.point_count = set.point_set()->points().size();
  }
  mask.metadata.theta_steps = options.theta_steps;
  mask.metadata.slack = options.slack;

  detail::parallel_for(spec.total(), threads, [&](std::size_t i) {
    mask.membership[i] = classify_point(f, spec.point(i), set, options).member ? 1 : 0;
  });
  return mask;
}

/// a => b pointwise.
inline bool mask_subset(const RegionMask& a, const RegionMask& b) {
  if (!(a.grid == b.grid) || a.membership.size() != b.membership.size()) {
    throw Error(ErrorKind::GridMismatch, "masks are on different grids");
  }
  for (std::size_t i = 0; i < a.membership.size(); ++i) {
    if (a.membership[i] && !b.membership[i]) return false;
  }
  return true;
}

/// Number of points where a holds and b does not.
inline std::size_t subset_violations(const RegionMask& a, const RegionMask& b) {
  if (!(a.grid == b.grid) || a.membership.size() != b.membership.size()) {
    throw Error(ErrorKind::GridMismatch, "masks are on different grids");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.membership.size(); ++i) {
    if (a.membership[i] && !b.membership[i]) ++n;
  }
  return n;
}

}  // namespace minreg

#endif  // MINREG_SCANNER_HPP
