#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace wulffkit {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

template <int D>
using Mat = Eigen::Matrix<double, D, D>;

/// Directions shorter than this are rejected instead of being regularized.
inline constexpr double kZeroFloor = 1e-12;

/// |<xi, nu>| must exceed this for xi to count as transversal.
inline constexpr double kTransversalTol = 1e-8;

enum class ErrorKind {
  ZeroDirection,
  NonConvergence,
  DegenerateChart,
  NotTransversal,
  IndexOutOfRange,
  TooLarge,
  GaugeZero,
  BoundaryInsideRegion,
  OriginNotOnSurface,
  NotClosed,
  NotEquiaffine,
  InvalidArgument,
  Config,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroDirection: return "ZeroDirection";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DegenerateChart: return "DegenerateChart";
    case ErrorKind::NotTransversal: return "NotTransversal";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::GaugeZero: return "GaugeZero";
    case ErrorKind::BoundaryInsideRegion: return "BoundaryInsideRegion";
    case ErrorKind::OriginNotOnSurface: return "OriginNotOnSurface";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::NotEquiaffine: return "NotEquiaffine";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <int D>
void require_nonzero(const Vec<D>& u, std::string_view where) {
  if (!(u.norm() >= kZeroFloor)) {
    throw Error(ErrorKind::ZeroDirection, std::string(where) + ": direction below zero floor");
  }
}

inline double sign_with_deadband(double x, double band) {
  if (std::abs(x) < band) return 0.0;
  return x > 0.0 ? 1.0 : -1.0;
}

namespace detail {

inline std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace detail

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace wulffkit
