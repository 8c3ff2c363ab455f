#pragma once

#include <algorithm>
#include <vector>

#include "wulffkit/frame.hpp"

namespace wulffkit {

/// Ambient vector field along a patch, given on parameters.
template <int N>
using VectorField = std::function<Vec<N + 1>(const ParametricPatch<N>&, const Param<N>&)>;

template <int N>
using ScalarField = std::function<double(const ParametricPatch<N>&, const Param<N>&)>;

namespace fields {

template <int N>
VectorField<N> constant(const Vec<N + 1>& b) {
  return [b](const ParametricPatch<N>&, const Param<N>&) { return b; };
}

template <int N>
VectorField<N> position() {
  return [](const ParametricPatch<N>& patch, const Param<N>& p) { return patch.position(p); };
}

}  // namespace fields

struct DxTopResidual {
  /// max_ij of the frame identity for <D_{e_j} X^{T_xi}, e_i>
  double matrix = 0.0;
  /// divergence (trace) form
  double trace = 0.0;
};

/// Both sides of the full-derivative identity for X^{T_xi}; the left side is a
/// finite difference of X^{T_xi}, the right side is assembled from frames.
template <int N>
DxTopResidual check_lemma_DX_top(const ParametricPatch<N>& patch, const TransversalField<N>& xi_field,
                                 const VectorField<N>& x_field, const Param<N>& p) {
  constexpr int D = N + 1;
  const auto frame = frame_at(patch, p);
  const auto ef = equiaffine_frame(patch, xi_field, frame);
  const Vec<D> X = x_field(patch, p);
  const Vec<D> xi_t = frame.tangential(ef.xi);

  const auto d_top = frame_derivatives(frame, [&](const Param<N>& q) {
    return Vec<D>(affine_tangential<D>(x_field(patch, q), xi_field.at(patch, q), patch.normal(q)));
  });
  const auto d_x = frame_derivatives(frame, [&](const Param<N>& q) { return Vec<D>(x_field(patch, q)); });
  const auto d_xnu = frame_derivatives(frame, [&](const Param<N>& q) {
    return Eigen::Matrix<double, 1, 1>(x_field(patch, q).dot(patch.normal(q)));
  });
  const Vec<N> xi_c = frame.components(xi_t);
  const Vec<N> x_c = frame.components(X);
  const double x_nu = X.dot(frame.nu);

  DxTopResidual out;
  double lhs_trace = 0.0, div_x = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double lhs = d_top[j].dot(frame.tangents.col(i));
      const double ii_xi_ej = xi_c.dot(frame.II.col(j));
      const double rhs = ef.support * d_x[j].dot(frame.tangents.col(i)) - x_c[i] * ii_xi_ej -
                         xi_c[i] * d_xnu[j](0) + x_nu * ef.S(i, j);
      out.matrix = std::max(out.matrix, std::abs(lhs - rhs));
    }
    lhs_trace += d_top[i].dot(frame.tangents.col(i));
    div_x += d_x[i].dot(frame.tangents.col(i));
  }
  // II(X^T) + grad<X, nu>, paired with xi.
  Vec<D> corr = Vec<D>::Zero();
  const Vec<N> ii_x = frame.II * x_c;
  for (int j = 0; j < N; ++j) corr += (ii_x[j] + d_xnu[j](0)) * frame.tangents.col(j);
  const double rhs_trace = ef.support * div_x + x_nu * ef.H_xi - corr.dot(ef.xi);
  out.trace = std::abs(lhs_trace - rhs_trace);
  return out;
}

struct ConstPositionResidual {
  double b = 0.0;
  double x = 0.0;
};

/// div b^{T_xi} = <b, nu> H_xi and div x^{T_xi} = n <xi, nu> + <x, nu> H_xi,
/// divergences taken by finite differences.
template <int N>
ConstPositionResidual check_lemma_const_and_position(const ParametricPatch<N>& patch,
                                                     const TransversalField<N>& xi_field, const Param<N>& p,
                                                     const Vec<N + 1>& b) {
  constexpr int D = N + 1;
  const auto frame = frame_at(patch, p);
  const auto ef = equiaffine_frame(patch, xi_field, frame);
  auto top = [&](const VectorField<N>& v) {
    return std::function<Vec<D>(const Param<N>&)>([&, v](const Param<N>& q) {
      return Vec<D>(affine_tangential<D>(v(patch, q), xi_field.at(patch, q), patch.normal(q)));
    });
  };
  const double div_b = surface_divergence<N>(patch, top(fields::constant<N>(b)), p);
  const double div_x = surface_divergence<N>(patch, top(fields::position<N>()), p);
  ConstPositionResidual r;
  r.b = std::abs(div_b - b.dot(frame.nu) * ef.H_xi);
  r.x = std::abs(div_x - N * ef.support - frame.x.dot(frame.nu) * ef.H_xi);
  return r;
}

/// Product rule: div(f X^{T_xi}) = f div X^{T_xi} + <xi,nu><grad f, X> - <X,nu><grad f, xi>.
template <int N>
double check_lemma_product(const ParametricPatch<N>& patch, const TransversalField<N>& xi_field,
                           const ScalarField<N>& f, const VectorField<N>& x_field, const Param<N>& p) {
  constexpr int D = N + 1;
  const auto frame = frame_at(patch, p);
  const auto ef = equiaffine_frame(patch, xi_field, frame);
  auto top = [&](const Param<N>& q) {
    return Vec<D>(affine_tangential<D>(x_field(patch, q), xi_field.at(patch, q), patch.normal(q)));
  };
  const double div_f_top = surface_divergence<N>(
      patch, [&](const Param<N>& q) { return Vec<D>(f(patch, q) * top(q)); }, p);
  const double div_top = surface_divergence<N>(patch, top, p);
  const Vec<D> grad_f = surface_gradient<N>(frame, [&](const Param<N>& q) { return f(patch, q); });
  const Vec<D> X = x_field(patch, p);
  const double rhs = f(patch, p) * div_top + ef.support * grad_f.dot(X) - X.dot(frame.nu) * grad_f.dot(ef.xi);
  return std::abs(div_f_top - rhs);
}

/// ||II S^m - (II S^m)^T||_inf for m = 1..max_power. II S is self-adjoint on
/// equiaffine hypersurfaces, hence so is II P(S) for every polynomial P.
template <int N>
std::vector<double> check_self_adjoint(const PointFrame<N>& frame, const EquiaffineFrame<N>& ef, int max_power = 2) {
  std::vector<double> out;
  Eigen::Matrix<double, N, N> power = Eigen::Matrix<double, N, N>::Identity();
  for (int m = 1; m <= max_power; ++m) {
    power = power * ef.S;
    const Eigen::Matrix<double, N, N> t = frame.II * power;
    out.push_back((t - t.transpose()).cwiseAbs().maxCoeff());
  }
  return out;
}

/// |[D^M_{e1} S](e2) - [D^M_{e2} S](e1)|, covariant derivatives taken in the
/// coordinate frame with finite-differenced Christoffel symbols. The outer
/// derivatives use a coarser step with one Richardson level since S itself is
/// a finite difference. Curves have nothing to check and return 0.
template <int N>
double codazzi_residual(const ParametricPatch<N>& patch, const TransversalField<N>& xi_field, const Param<N>& p,
                        double outer_step = 1e-3, double inner_step = 1e-4) {
  if constexpr (N == 1) {
    return 0.0;
  } else {
    constexpr int D = N + 1;
    using MatN = Eigen::Matrix<double, N, N>;
    const auto frame = frame_at(patch, p);

    // S in coordinates: S(d_a) = sum_b Sc(b, a) d_b.
    auto s_coord = [&](const Param<N>& q) {
      const auto fq = frame_at(patch, q);
      const auto ef = equiaffine_frame(patch, xi_field, fq, inner_step);
      // frame components -> coordinate components: d_a = sum_i R(i, a) e_i.
      const MatN to_coord = fq.coord_to_frame;
      const MatN r = to_coord.inverse();
      return MatN(to_coord * ef.S * r);
    };
    auto metric = [&](const Param<N>& q) {
      const auto j = patch.jet(q);
      return MatN(j.jac.transpose() * j.jac);
    };
    auto richardson = [&](auto fn, int axis) {
      double h = param_step(frame, axis, outer_step);
      const auto& dom = patch.domain();
      if (dom.kind[axis] == AxisKind::Pole) {
        h = std::min(h, 0.5 * std::min(p[axis] - dom.lo[axis], dom.hi[axis] - p[axis]));
      }
      auto d = [&](double step) {
        Param<N> pp = p, pm = p;
        pp[axis] += step;
        pm[axis] -= step;
        return MatN((fn(pp) - fn(pm)) / (2.0 * step));
      };
      return MatN((4.0 * d(0.5 * h) - d(h)) / 3.0);
    };

    std::array<MatN, N> dS, dg;
    for (int c = 0; c < N; ++c) {
      dS[c] = richardson(s_coord, c);
      dg[c] = richardson(metric, c);
    }
    const MatN g = metric(p);
    const MatN g_inv = g.inverse();
    const MatN S = s_coord(p);
    // gamma[b](c, d) = Gamma^b_{cd}
    std::array<MatN, N> gamma;
    for (int b = 0; b < N; ++b) {
      gamma[b].setZero();
      for (int c = 0; c < N; ++c)
        for (int d = 0; d < N; ++d)
          for (int e = 0; e < N; ++e)
            gamma[b](c, d) += 0.5 * g_inv(b, e) * (dg[c](e, d) + dg[d](e, c) - dg[e](c, d));
    }
    Vec<N> comp = Vec<N>::Zero();
    for (int b = 0; b < N; ++b) {
      comp[b] = dS[0](b, 1) - dS[1](b, 0);
      for (int d = 0; d < N; ++d) comp[b] += gamma[b](0, d) * S(d, 1) - gamma[b](1, d) * S(d, 0);
    }
    const Vec<D> ambient = frame.jac * comp;
    return ambient.norm() * std::abs(frame.coord_to_frame.determinant());
  }
}

}  // namespace wulffkit
