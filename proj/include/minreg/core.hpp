#ifndef MINREG_CORE_HPP
#define MINREG_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace minreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  CoincidentPoints,
  ZeroVector,
  InsideBall,
  InsideSet,
  NotOnBoundary,
  DimensionMismatch,
  KinkPoint,
  InvalidArgument,
  NumericalDomain,
  NonConvergence,
  InvalidGrid,
  GridMismatch,
  Config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CoincidentPoints: return "coincident points";
    case ErrorKind::ZeroVector: return "zero vector";
    case ErrorKind::InsideBall: return "point inside ball";
    case ErrorKind::InsideSet: return "point inside uncertainty set";
    case ErrorKind::NotOnBoundary: return "point not on ball boundary";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::KinkPoint: return "nonsmooth point";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NumericalDomain: return "numerical domain error";
    case ErrorKind::NonConvergence: return "no convergence";
    case ErrorKind::InvalidGrid: return "invalid grid";
    case ErrorKind::GridMismatch: return "grid mismatch";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

/// Every failure raised by the library carries a kind so callers (and tests)
/// can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " has non-finite components");
  }
}

inline void require_same_dimension(const Vector& a, const Vector& b, const char* context) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(context) + ": " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
}

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace minreg

#endif  // MINREG_CORE_HPP
