#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wulffkit/core.hpp"

namespace wulffkit {

template <int N>
using Param = Eigen::Matrix<double, N, 1>;

/// How a parameter axis closes up. Periodic axes wrap; pole axes collapse to a
/// point at both ends (sphere-like charts), so their ends are not boundary.
enum class AxisKind { Open, Periodic, Pole };

template <int N>
struct ParamDomain {
  std::array<double, N> lo{};
  std::array<double, N> hi{};
  std::array<AxisKind, N> kind{};

  bool closed() const {
    for (auto k : kind)
      if (k == AxisKind::Open) return false;
    return true;
  }
};

/// Position, coordinate tangents and second parameter derivatives at a point.
template <int N>
struct ChartJet {
  static constexpr int D = N + 1;
  Vec<D> x = Vec<D>::Zero();
  Eigen::Matrix<double, D, N> jac = Eigen::Matrix<double, D, N>::Zero();
  std::array<std::array<Vec<D>, N>, N> second{};
};

/// Generalized cross product w of the columns v_1..v_N, <w, y> = det(v_1..v_N, y).
template <int N>
Vec<N + 1> generalized_cross(const Eigen::Matrix<double, N + 1, N>& cols) {
  static_assert(N == 1 || N == 2, "only curves and surfaces are supported");
  if constexpr (N == 1) {
    return Vec<2>(-cols(1, 0), cols(0, 0));
  } else {
    return Vec<3>(cols.col(0).cross(cols.col(1)));
  }
}

/// A smooth immersion of a parameter rectangle into R^{N+1}.
///
/// Built-ins provide analytic jets. `from_position` wraps a position-only
/// chart and differentiates it numerically.
template <int N>
class ParametricPatch {
 public:
  static constexpr int n = N;
  static constexpr int D = N + 1;
  using JetFn = std::function<ChartJet<N>(const Param<N>&)>;
  using PositionFn = std::function<Vec<D>(const Param<N>&)>;

  ParametricPatch(std::string name, ParamDomain<N> domain, JetFn jet, double orientation = 1.0)
      : name_(std::move(name)), domain_(domain), jet_(std::move(jet)), orientation_(orientation) {}

  static ParametricPatch from_position(std::string name, ParamDomain<N> domain, PositionFn pos,
                                       double orientation = 1.0) {
    auto jet = [pos](const Param<N>& p) {
      ChartJet<N> j;
      j.x = pos(p);
      constexpr double h1 = 1e-5;
      constexpr double h2 = 1e-3;
      for (int a = 0; a < N; ++a) {
        auto d = [&](double h) {
          Param<N> pp = p, pm = p;
          pp[a] += h;
          pm[a] -= h;
          return Vec<D>((pos(pp) - pos(pm)) / (2 * h));
        };
        j.jac.col(a) = (4.0 * d(0.5 * h1) - d(h1)) / 3.0;
        for (int b = a; b < N; ++b) {
          auto s = [&](double h) {
            auto f = [&](double da, double db) {
              Param<N> q = p;
              q[a] += da;
              q[b] += db;
              return pos(q);
            };
            if (a == b) return Vec<D>((f(h, 0) - 2.0 * j.x + f(-h, 0)) / (h * h));
            return Vec<D>((f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h));
          };
          j.second[a][b] = (4.0 * s(0.5 * h2) - s(h2)) / 3.0;
          j.second[b][a] = j.second[a][b];
        }
      }
      return j;
    };
    return ParametricPatch(std::move(name), domain, jet, orientation);
  }

  const std::string& name() const noexcept { return name_; }
  const ParamDomain<N>& domain() const noexcept { return domain_; }
  double orientation() const noexcept { return orientation_; }

  ChartJet<N> jet(const Param<N>& p) const { return jet_(p); }
  Vec<D> position(const Param<N>& p) const { return jet_(p).x; }

  /// Unit normal: normalized generalized cross product of the coordinate
  /// tangents times the orientation sign.
  Vec<D> normal(const Param<N>& p) const { return normal_from(jet_(p)); }

  Vec<D> normal_from(const ChartJet<N>& j) const {
    const Eigen::Matrix<double, N, N> gram = j.jac.transpose() * j.jac;
    if (!(gram.determinant() > 1e-12)) {
      throw Error(ErrorKind::DegenerateChart, name_ + ": Gram determinant underflow");
    }
    return orientation_ * generalized_cross<N>(j.jac).normalized();
  }

  /// Image under x -> L x + b. The normal keeps its side when det L > 0.
  ParametricPatch affine_image(const Mat<D>& linear, const Vec<D>& shift, std::string new_name = {}) const {
    auto inner = jet_;
    auto jet = [inner, linear, shift](const Param<N>& p) {
      ChartJet<N> j = inner(p);
      j.x = linear * j.x + shift;
      j.jac = linear * j.jac;
      for (auto& row : j.second)
        for (auto& v : row) v = linear * v;
      return j;
    };
    const double sgn = linear.determinant() > 0 ? 1.0 : -1.0;
    return ParametricPatch(new_name.empty() ? name_ : std::move(new_name), domain_, jet, orientation_ * sgn);
  }

  ParametricPatch scaled(double lambda) const {
    return affine_image(lambda * Mat<D>::Identity(), Vec<D>::Zero(), name_);
  }

  /// Uniform grid of `per_axis`^N parameter points; pole axes keep `pole_margin`
  /// away from their ends and periodic axes skip the duplicated endpoint.
  std::vector<Param<N>> sample_grid(int per_axis, double pole_margin = 1e-3) const {
    std::array<std::vector<double>, N> axis;
    for (int a = 0; a < N; ++a) {
      double lo = domain_.lo[a], hi = domain_.hi[a];
      if (domain_.kind[a] == AxisKind::Pole) {
        lo += pole_margin;
        hi -= pole_margin;
      }
      for (int i = 0; i < per_axis; ++i) {
        if (domain_.kind[a] == AxisKind::Periodic) {
          axis[a].push_back(lo + (hi - lo) * i / per_axis);
        } else {
          axis[a].push_back(per_axis == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (per_axis - 1));
        }
      }
    }
    std::vector<Param<N>> out;
    if constexpr (N == 1) {
      for (double t : axis[0]) out.push_back(Param<1>(t));
    } else {
      for (double u : axis[0])
        for (double v : axis[1]) out.push_back(Param<2>(u, v));
    }
    return out;
  }

  /// Points on the non-closing edges of the parameter rectangle.
  std::vector<Param<N>> boundary_samples(int per_edge) const {
    std::vector<Param<N>> out;
    for (int a = 0; a < N; ++a) {
      if (domain_.kind[a] != AxisKind::Open) continue;
      for (double end : {domain_.lo[a], domain_.hi[a]}) {
        if constexpr (N == 1) {
          out.push_back(Param<1>(end));
        } else {
          const int b = 1 - a;
          for (int i = 0; i <= per_edge; ++i) {
            Param<2> p;
            p[a] = end;
            p[b] = domain_.lo[b] + (domain_.hi[b] - domain_.lo[b]) * i / per_edge;
            out.push_back(p);
          }
        }
      }
    }
    return out;
  }

 private:
  std::string name_;
  ParamDomain<N> domain_;
  JetFn jet_;
  double orientation_ = 1.0;
};

namespace surfaces {

/// Straight line origin + t dir, t in [-half_length, half_length]; normal (-dir_y, dir_x).
inline ParametricPatch<1> line(const Vec<2>& origin, const Vec<2>& dir, double half_length) {
  const Vec<2> d = dir.normalized();
  ParamDomain<1> dom{{-half_length}, {half_length}, {AxisKind::Open}};
  return ParametricPatch<1>("line", dom, [origin, d](const Param<1>& p) {
    ChartJet<1> j;
    j.x = origin + p[0] * d;
    j.jac.col(0) = d;
    j.second[0][0].setZero();
    return j;
  });
}

/// Circle of radius r about the origin with outward normal.
inline ParametricPatch<1> circle(double radius) {
  ParamDomain<1> dom{{0.0}, {2 * kPi}, {AxisKind::Periodic}};
  // generalized cross of (-sin, cos) is (-cos, -sin): flip to point outward.
  return ParametricPatch<1>(
      "circle", dom,
      [radius](const Param<1>& p) {
        ChartJet<1> j;
        const double c = std::cos(p[0]), s = std::sin(p[0]);
        j.x = radius * Vec<2>(c, s);
        j.jac.col(0) = radius * Vec<2>(-s, c);
        j.second[0][0] = -j.x;
        return j;
      },
      -1.0);
}

/// Graph (t, g(t)) with normal (-g', 1)/|.|.
inline ParametricPatch<1> graph_curve(std::function<std::array<double, 3>(double)> g, double lo, double hi) {
  ParamDomain<1> dom{{lo}, {hi}, {AxisKind::Open}};
  return ParametricPatch<1>("graph", dom, [g](const Param<1>& p) {
    const auto v = g(p[0]);
    ChartJet<1> j;
    j.x = Vec<2>(p[0], v[0]);
    j.jac.col(0) = Vec<2>(1.0, v[1]);
    j.second[0][0] = Vec<2>(0.0, v[2]);
    return j;
  });
}

/// Square patch [-half_width, half_width]^2 of the plane through `origin` with
/// unit normal `normal`.
inline ParametricPatch<2> hyperplane(const Vec<3>& origin, const Vec<3>& normal, double half_width) {
  const Vec<3> nu = normal.normalized();
  Vec<3> w0 = (std::abs(nu[0]) < 0.9 ? Vec<3>::UnitX() : Vec<3>::UnitY());
  w0 = (w0 - w0.dot(nu) * nu).normalized();
  const Vec<3> w1 = nu.cross(w0);
  ParamDomain<2> dom{{-half_width, -half_width}, {half_width, half_width}, {AxisKind::Open, AxisKind::Open}};
  return ParametricPatch<2>("hyperplane", dom, [origin, w0, w1](const Param<2>& p) {
    ChartJet<2> j;
    j.x = origin + p[0] * w0 + p[1] * w1;
    j.jac.col(0) = w0;
    j.jac.col(1) = w1;
    for (auto& row : j.second)
      for (auto& v : row) v.setZero();
    return j;
  });
}

/// Sphere of the given radius, chart (theta, phi) with theta a pole axis; outward normal.
inline ParametricPatch<2> sphere(double radius = 1.0) {
  ParamDomain<2> dom{{0.0, 0.0}, {kPi, 2 * kPi}, {AxisKind::Pole, AxisKind::Periodic}};
  return ParametricPatch<2>("sphere", dom, [radius](const Param<2>& p) {
    const double st = std::sin(p[0]), ct = std::cos(p[0]);
    const double sp = std::sin(p[1]), cp = std::cos(p[1]);
    ChartJet<2> j;
    j.x = radius * Vec<3>(st * cp, st * sp, ct);
    j.jac.col(0) = radius * Vec<3>(ct * cp, ct * sp, -st);
    j.jac.col(1) = radius * Vec<3>(-st * sp, st * cp, 0.0);
    j.second[0][0] = -j.x;
    j.second[0][1] = radius * Vec<3>(-ct * sp, ct * cp, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = radius * Vec<3>(-st * cp, -st * sp, 0.0);
    return j;
  });
}

/// Ellipsoid diag(a, b, c) applied to the unit sphere; outward normal.
inline ParametricPatch<2> ellipsoid(double a, double b, double c) {
  return sphere(1.0).affine_image(Vec<3>(a, b, c).asDiagonal().toDenseMatrix(), Vec<3>::Zero(), "ellipsoid");
}

/// scale * (cosh v cos u, cosh v sin u, v), u periodic, |v| <= half_height;
/// the normal points away from the axis.
inline ParametricPatch<2> catenoid(double half_height, double scale = 1.0) {
  ParamDomain<2> dom{{0.0, -half_height}, {2 * kPi, half_height}, {AxisKind::Periodic, AxisKind::Open}};
  return ParametricPatch<2>("catenoid", dom, [scale](const Param<2>& p) {
    const double cu = std::cos(p[0]), su = std::sin(p[0]);
    const double ch = std::cosh(p[1]), sh = std::sinh(p[1]);
    ChartJet<2> j;
    j.x = scale * Vec<3>(ch * cu, ch * su, p[1]);
    j.jac.col(0) = scale * Vec<3>(-ch * su, ch * cu, 0.0);
    j.jac.col(1) = scale * Vec<3>(sh * cu, sh * su, 1.0);
    j.second[0][0] = scale * Vec<3>(-ch * cu, -ch * su, 0.0);
    j.second[0][1] = scale * Vec<3>(-sh * su, sh * cu, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = scale * Vec<3>(ch * cu, ch * su, 0.0);
    return j;
  });
}

/// Symmetric positive-definite square root.
inline Mat<3> spd_sqrt(const Mat<3>& a) {
  Eigen::SelfAdjointEigenSolver<Mat<3>> es(a);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "matrix square root needs a positive-definite matrix");
  }
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// A^{1/2} applied to the catenoid. It is F-minimal for F(u) = sqrt(<Au, u>),
/// since the F-energy of the image is det(A^{1/2}) times the Euclidean area.
inline ParametricPatch<2> transformed_catenoid(const Mat<3>& a, double half_height) {
  return catenoid(half_height).affine_image(spd_sqrt(a), Vec<3>::Zero(), "transformed-catenoid");
}

/// Graph (x, y, g(x, y)) over a rectangle; g returns value, gradient and Hessian.
struct GraphJet {
  double value;
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

inline ParametricPatch<2> graph_surface(std::function<GraphJet(double, double)> g, double x_lo, double x_hi,
                                        double y_lo, double y_hi) {
  ParamDomain<2> dom{{x_lo, y_lo}, {x_hi, y_hi}, {AxisKind::Open, AxisKind::Open}};
  return ParametricPatch<2>("graph", dom, [g](const Param<2>& p) {
    const GraphJet v = g(p[0], p[1]);
    ChartJet<2> j;
    j.x = Vec<3>(p[0], p[1], v.value);
    j.jac.col(0) = Vec<3>(1.0, 0.0, v.grad[0]);
    j.jac.col(1) = Vec<3>(0.0, 1.0, v.grad[1]);
    j.second[0][0] = Vec<3>(0.0, 0.0, v.hess(0, 0));
    j.second[0][1] = Vec<3>(0.0, 0.0, v.hess(0, 1));
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = Vec<3>(0.0, 0.0, v.hess(1, 1));
    return j;
  });
}

/// Enneper's minimal surface, scaled, over [-half_width, half_width]^2; passes
/// through the origin with normal (0, 0, 1) there.
inline ParametricPatch<2> enneper(double scale, double half_width) {
  ParamDomain<2> dom{{-half_width, -half_width}, {half_width, half_width}, {AxisKind::Open, AxisKind::Open}};
  return ParametricPatch<2>("enneper", dom, [scale](const Param<2>& p) {
    const double u = p[0], v = p[1];
    ChartJet<2> j;
    j.x = scale * Vec<3>(u - u * u * u / 3 + u * v * v, v - v * v * v / 3 + v * u * u, u * u - v * v);
    j.jac.col(0) = scale * Vec<3>(1 - u * u + v * v, 2 * u * v, 2 * u);
    j.jac.col(1) = scale * Vec<3>(2 * u * v, 1 - v * v + u * u, -2 * v);
    j.second[0][0] = scale * Vec<3>(-2 * u, 2 * v, 2.0);
    j.second[0][1] = scale * Vec<3>(2 * v, 2 * u, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = scale * Vec<3>(2 * u, -2 * v, -2.0);
    return j;
  });
}

}  // namespace surfaces
}  // namespace wulffkit
