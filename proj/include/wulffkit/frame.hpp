#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "wulffkit/norm.hpp"
#include "wulffkit/patch.hpp"

namespace wulffkit {

/// Parameter-space step for first-order finite differences; divided by long
/// coordinate tangents so the ambient displacement stays about this size.
inline constexpr double kFdParamStep = 1e-5;

/// Orthonormal frame, unit normal and second fundamental form at one point.
///
/// `tangents` come from Gram-Schmidt on the coordinate tangents in axis order,
/// so tangents = jac * coord_to_frame. The second fundamental form uses the
/// shape operator X -> -D_X nu, which makes II = -I on the unit sphere with
/// outward normal.
template <int N>
struct PointFrame {
  static constexpr int D = N + 1;
  Param<N> p = Param<N>::Zero();
  Vec<D> x = Vec<D>::Zero();
  Eigen::Matrix<double, D, N> jac = Eigen::Matrix<double, D, N>::Zero();
  Eigen::Matrix<double, D, N> tangents = Eigen::Matrix<double, D, N>::Zero();
  Eigen::Matrix<double, N, N> coord_to_frame = Eigen::Matrix<double, N, N>::Identity();
  Vec<D> nu = Vec<D>::Zero();
  Eigen::Matrix<double, N, N> II = Eigen::Matrix<double, N, N>::Zero();
  double H = 0.0;
  /// sqrt(det g), the area element in parameter space.
  double area_element = 0.0;

  Vec<D> tangential(const Vec<D>& v) const { return v - v.dot(nu) * nu; }
  /// Components of a vector in the orthonormal tangent basis.
  Vec<N> components(const Vec<D>& v) const { return tangents.transpose() * v; }
};

template <int N>
PointFrame<N> frame_from_jet(const ParametricPatch<N>& patch, const Param<N>& p, const ChartJet<N>& jet) {
  PointFrame<N> f;
  f.p = p;
  f.x = jet.x;
  f.jac = jet.jac;
  const Eigen::Matrix<double, N, N> gram = jet.jac.transpose() * jet.jac;
  const double det = gram.determinant();
  if (!(det > 1e-12)) throw Error(ErrorKind::DegenerateChart, patch.name() + ": Gram determinant underflow");
  f.area_element = std::sqrt(det);

  // Gram-Schmidt: jac = tangents * R with R upper triangular.
  Eigen::Matrix<double, N, N> r = Eigen::Matrix<double, N, N>::Zero();
  for (int a = 0; a < N; ++a) {
    Vec<N + 1> v = jet.jac.col(a);
    for (int b = 0; b < a; ++b) {
      r(b, a) = f.tangents.col(b).dot(v);
      v -= r(b, a) * f.tangents.col(b);
    }
    r(a, a) = v.norm();
    f.tangents.col(a) = v / r(a, a);
  }
  f.coord_to_frame = r.inverse();
  f.nu = patch.orientation() * generalized_cross<N>(jet.jac).normalized();

  Eigen::Matrix<double, N, N> b;
  for (int a = 0; a < N; ++a)
    for (int c = 0; c < N; ++c) b(a, c) = jet.second[a][c].dot(f.nu);
  f.II = f.coord_to_frame.transpose() * b * f.coord_to_frame;
  f.II = 0.5 * (f.II + f.II.transpose());
  f.H = f.II.trace();
  return f;
}

template <int N>
PointFrame<N> frame_at(const ParametricPatch<N>& patch, const Param<N>& p) {
  return frame_from_jet(patch, p, patch.jet(p));
}

/// Parameter step along axis a: `step / |d_a X|`, but never longer than `step`
/// itself, so short coordinate tangents near a pole do not stretch the stencil.
template <int N>
double param_step(const PointFrame<N>& frame, int a, double step) {
  return step / std::max(1.0, frame.jac.col(a).norm());
}

/// Central-difference partials of a parameter function, one per axis.
template <int N, typename Fn>
auto param_partials(const PointFrame<N>& frame, const Fn& fn, double step = kFdParamStep) {
  using R = std::decay_t<decltype(fn(frame.p))>;
  std::array<R, N> out;
  for (int a = 0; a < N; ++a) {
    const double h = param_step(frame, a, step);
    Param<N> pp = frame.p, pm = frame.p;
    pp[a] += h;
    pm[a] -= h;
    out[a] = R((fn(pp) - fn(pm)) / (2.0 * h));
  }
  return out;
}

/// D_{e_i} of a parameter function, for each orthonormal tangent e_i.
template <int N, typename Fn>
auto frame_derivatives(const PointFrame<N>& frame, const Fn& fn, double step = kFdParamStep) {
  const auto partials = param_partials(frame, fn, step);
  using R = typename decltype(partials)::value_type;
  std::array<R, N> out;
  for (int i = 0; i < N; ++i) {
    out[i] = R(partials[0] * frame.coord_to_frame(0, i));
    for (int a = 1; a < N; ++a) out[i] = R(out[i] + partials[a] * frame.coord_to_frame(a, i));
  }
  return out;
}

/// div_M W = sum_i <D_{e_i} W, e_i> by finite differences along parameter lines.
template <int N>
double surface_divergence(const ParametricPatch<N>& patch, const std::function<Vec<N + 1>(const Param<N>&)>& field,
                          const Param<N>& p) {
  const auto frame = frame_at(patch, p);
  const auto d = frame_derivatives(frame, field);
  double div = 0.0;
  for (int i = 0; i < N; ++i) div += d[i].dot(frame.tangents.col(i));
  return div;
}

/// Tangential gradient of a scalar parameter function.
template <int N>
Vec<N + 1> surface_gradient(const PointFrame<N>& frame, const std::function<double(const Param<N>&)>& f) {
  const auto d = frame_derivatives(frame, [&](const Param<N>& q) { return Eigen::Matrix<double, 1, 1>(f(q)); });
  Vec<N + 1> g = Vec<N + 1>::Zero();
  for (int i = 0; i < N; ++i) g += d[i](0) * frame.tangents.col(i);
  return g;
}

/// <xi, nu> V - <V, nu> xi: the tangential part of V along the transversal xi.
template <int D>
Vec<D> affine_tangential(const Vec<D>& v, const Vec<D>& xi, const Vec<D>& nu) {
  return xi.dot(nu) * v - v.dot(nu) * xi;
}

/// nu_F = grad F(nu).
template <int N>
Vec<N + 1> anisotropic_normal(const MinkowskiNorm<N + 1>& norm, const PointFrame<N>& frame) {
  return norm.grad(frame.nu);
}

/// H_{nu_F} = tr(X -> -D_X nu_F) = sum_ij II_ij <D^2F(nu) e_j, e_i> by the chain rule.
template <int N>
double anisotropic_mean_curvature(const MinkowskiNorm<N + 1>& norm, const ParametricPatch<N>& patch,
                                  const Param<N>& p) {
  const auto frame = frame_at(patch, p);
  const Eigen::Matrix<double, N, N> restricted = frame.tangents.transpose() * norm.hess(frame.nu) * frame.tangents;
  return (frame.II * restricted).trace();
}

/// Independent route: -div_M nu_F by finite differences.
template <int N>
double anisotropic_mean_curvature_fd(const MinkowskiNorm<N + 1>& norm, const ParametricPatch<N>& patch,
                                     const Param<N>& p) {
  return -surface_divergence<N>(
      patch, [&](const Param<N>& q) { return Vec<N + 1>(norm.grad(patch.normal(q))); }, p);
}

enum class TransversalKind { Anisotropic, EuclideanNormal, Constant, Custom };

/// A transversal vector field xi along a patch, evaluated on parameters.
template <int N>
struct TransversalField {
  static constexpr int D = N + 1;
  TransversalKind kind = TransversalKind::EuclideanNormal;
  std::string name;
  std::function<Vec<D>(const ParametricPatch<N>&, const Param<N>&)> at;
  std::optional<MinkowskiNorm<D>> norm;

  static TransversalField anisotropic(const MinkowskiNorm<D>& f) {
    TransversalField t;
    t.kind = TransversalKind::Anisotropic;
    t.name = "nu_F(" + f.name() + ")";
    t.norm = f;
    t.at = [f](const ParametricPatch<N>& patch, const Param<N>& p) { return f.grad(patch.normal(p)); };
    return t;
  }

  static TransversalField euclidean_normal() {
    TransversalField t;
    t.kind = TransversalKind::EuclideanNormal;
    t.name = "nu";
    t.at = [](const ParametricPatch<N>& patch, const Param<N>& p) { return patch.normal(p); };
    return t;
  }

  static TransversalField constant(const Vec<D>& c) {
    TransversalField t;
    t.kind = TransversalKind::Constant;
    t.name = "constant";
    t.at = [c](const ParametricPatch<N>&, const Param<N>&) { return c; };
    return t;
  }

  static TransversalField custom(std::string name, std::function<Vec<D>(const ParametricPatch<N>&, const Param<N>&)> fn) {
    TransversalField t;
    t.kind = TransversalKind::Custom;
    t.name = std::move(name);
    t.at = std::move(fn);
    return t;
  }
};

/// Gauss/Weingarten data for a transversal field at one point, in the
/// orthonormal tangent basis of the matching PointFrame.
///
/// `S` acts on frame components: S(e_i) = sum_j S(j, i) e_j. D xi is taken
/// with one Richardson level at `step`.
template <int N>
struct EquiaffineFrame {
  static constexpr int D = N + 1;
  Vec<D> xi = Vec<D>::Zero();
  double support = 0.0;
  Eigen::Matrix<double, N, N> S = Eigen::Matrix<double, N, N>::Zero();
  Eigen::Matrix<double, N, N> h = Eigen::Matrix<double, N, N>::Zero();
  Vec<N> tau = Vec<N>::Zero();
  double H_xi = 0.0;
  /// D_{e_i} xi as columns.
  Eigen::Matrix<double, D, N> d_xi = Eigen::Matrix<double, D, N>::Zero();
};

template <int N>
EquiaffineFrame<N> equiaffine_frame(const ParametricPatch<N>& patch, const TransversalField<N>& field,
                                    const PointFrame<N>& frame, double step = kFdParamStep) {
  constexpr int D = N + 1;
  EquiaffineFrame<N> e;
  e.xi = field.at(patch, frame.p);
  e.support = e.xi.dot(frame.nu);
  if (!(std::abs(e.support) > kTransversalTol)) {
    throw Error(ErrorKind::NotTransversal, field.name + " is tangent to " + patch.name());
  }
  auto xi_at = [&](const Param<N>& q) { return Vec<D>(field.at(patch, q)); };
  const auto coarse = frame_derivatives(frame, xi_at, step);
  const auto fine = frame_derivatives(frame, xi_at, 0.5 * step);
  std::array<Vec<D>, N> dxi;
  for (int i = 0; i < N; ++i) dxi[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  for (int i = 0; i < N; ++i) {
    e.d_xi.col(i) = dxi[i];
    // D_{e_i} xi = -S(e_i) + tau(e_i) xi, split with the xi-adapted projection.
    e.tau[i] = dxi[i].dot(frame.nu) / e.support;
    const Vec<D> tangent_part = affine_tangential<D>(dxi[i], e.xi, frame.nu) / e.support;
    e.S.col(i) = -frame.components(tangent_part);
  }
  e.h = frame.II / e.support;
  e.H_xi = e.S.trace();
  return e;
}

template <int N>
EquiaffineFrame<N> equiaffine_frame(const ParametricPatch<N>& patch, const TransversalField<N>& field,
                                    const Param<N>& p) {
  return equiaffine_frame(patch, field, frame_at(patch, p));
}

}  // namespace wulffkit
