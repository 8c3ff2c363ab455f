#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "wulffkit/core.hpp"
#include "wulffkit/sampling.hpp"

namespace wulffkit {

enum class NormFamily { Euclidean, Quadratic, QuarticRegularized, Custom };

inline std::string_view to_string(NormFamily f) {
  switch (f) {
    case NormFamily::Euclidean: return "euclidean";
    case NormFamily::Quadratic: return "quadratic";
    case NormFamily::QuarticRegularized: return "quartic-regularized";
    case NormFamily::Custom: return "custom";
  }
  return "unknown";
}

namespace detail {

/// Central difference of `f` along `dir`, Richardson-extrapolated once.
template <typename F>
auto richardson_diff(const F& f, double h) {
  auto d = [&](double step) { return ((f(step) - f(-step)) / (2.0 * step)).eval(); };
  return ((4.0 * d(0.5 * h) - d(h)) / 3.0).eval();
}

inline double richardson_diff_scalar(const std::function<double(double)>& f, double h) {
  auto d = [&](double step) { return (f(step) - f(-step)) / (2.0 * step); };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

}  // namespace detail

/// A positively 1-homogeneous gauge F on R^D with value, gradient and Hessian.
///
/// Euclidean, quadratic and regularized-quartic families have closed-form
/// derivatives. Custom norms supply a value callback and optionally gradient
/// and Hessian callbacks; missing derivatives fall back to Richardson
/// extrapolated central differences.
template <int D>
class MinkowskiNorm {
 public:
  using ValueFn = std::function<double(const Vec<D>&)>;
  using GradFn = std::function<Vec<D>(const Vec<D>&)>;
  using HessFn = std::function<Mat<D>(const Vec<D>&)>;

  static constexpr int dim = D;

  /// Step used for first derivatives of custom norms, relative to max(1, |u|).
  static constexpr double kFdStep = 1e-5;
  /// Step for Hessians computed from values alone (second differences).
  static constexpr double kFdHessStep = 1e-3;

  static MinkowskiNorm euclidean() {
    MinkowskiNorm n;
    n.family_ = NormFamily::Euclidean;
    n.name_ = "euclidean";
    return n;
  }

  static MinkowskiNorm quadratic(const Mat<D>& a) {
    if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::InvalidArgument, "quadratic norm matrix must be symmetric");
    }
    Eigen::LLT<Mat<D>> llt(a);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::InvalidArgument, "quadratic norm matrix must be positive definite");
    }
    MinkowskiNorm n;
    n.family_ = NormFamily::Quadratic;
    n.name_ = "quadratic";
    n.a_ = 0.5 * (a + a.transpose());
    n.a_inv_ = llt.solve(Mat<D>::Identity());
    n.a_inv_ = 0.5 * (n.a_inv_ + n.a_inv_.transpose());
    return n;
  }

  /// (sum_i u_i^4 + eps |u|^4)^(1/4); eps > 0 makes it elliptic.
  static MinkowskiNorm quartic_regularized(double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "quartic-regularized needs epsilon > 0");
    MinkowskiNorm n;
    n.family_ = NormFamily::QuarticRegularized;
    n.name_ = "quartic-regularized";
    n.eps_ = eps;
    return n;
  }

  static MinkowskiNorm custom(std::string name, ValueFn value, GradFn grad = {}, HessFn hess = {}) {
    if (!value) throw Error(ErrorKind::InvalidArgument, "custom norm needs a value callback");
    MinkowskiNorm n;
    n.family_ = NormFamily::Custom;
    n.name_ = std::move(name);
    n.value_ = std::move(value);
    n.grad_ = std::move(grad);
    n.hess_ = std::move(hess);
    return n;
  }

  NormFamily family() const noexcept { return family_; }
  const std::string& name() const noexcept { return name_; }
  const Mat<D>& matrix() const noexcept { return a_; }
  const Mat<D>& matrix_inverse() const noexcept { return a_inv_; }
  double epsilon() const noexcept { return eps_; }

  bool closed_form_gradient() const noexcept { return family_ != NormFamily::Custom || static_cast<bool>(grad_); }
  bool closed_form_hessian() const noexcept { return family_ != NormFamily::Custom || static_cast<bool>(hess_); }

  double eval(const Vec<D>& u) const {
    require_nonzero<D>(u, "norm eval");
    return value_unchecked(u);
  }

  Vec<D> grad(const Vec<D>& u) const {
    require_nonzero<D>(u, "norm grad");
    switch (family_) {
      case NormFamily::Euclidean: return u / u.norm();
      case NormFamily::Quadratic: {
        const Vec<D> au = a_ * u;
        return au / std::sqrt(u.dot(au));
      }
      case NormFamily::QuarticRegularized: {
        const double g = quartic_sum(u);
        return 0.25 * std::pow(g, -0.75) * quartic_grad(u);
      }
      case NormFamily::Custom:
        if (grad_) return grad_(u);
        return fd_grad(u);
    }
    return Vec<D>::Zero();
  }

  Mat<D> hess(const Vec<D>& u) const {
    require_nonzero<D>(u, "norm hess");
    switch (family_) {
      case NormFamily::Euclidean: {
        const double r = u.norm();
        return (Mat<D>::Identity() - u * u.transpose() / (r * r)) / r;
      }
      case NormFamily::Quadratic: {
        const Vec<D> au = a_ * u;
        const double f = std::sqrt(u.dot(au));
        return (a_ - au * au.transpose() / (f * f)) / f;
      }
      case NormFamily::QuarticRegularized: {
        const double g = quartic_sum(u);
        const Vec<D> dg = quartic_grad(u);
        const double r2 = u.squaredNorm();
        Mat<D> d2g = 4.0 * eps_ * (r2 * Mat<D>::Identity() + 2.0 * u * u.transpose());
        for (int i = 0; i < D; ++i) d2g(i, i) += 12.0 * u[i] * u[i];
        return 0.25 * std::pow(g, -0.75) * d2g - (3.0 / 16.0) * std::pow(g, -1.75) * dg * dg.transpose();
      }
      case NormFamily::Custom:
        if (hess_) return hess_(u);
        return fd_hess(u);
    }
    return Mat<D>::Zero();
  }

 private:
  MinkowskiNorm() = default;

  double value_unchecked(const Vec<D>& u) const {
    switch (family_) {
      case NormFamily::Euclidean: return u.norm();
      case NormFamily::Quadratic: return std::sqrt(u.dot(a_ * u));
      case NormFamily::QuarticRegularized: return std::pow(quartic_sum(u), 0.25);
      case NormFamily::Custom: return value_(u);
    }
    return 0.0;
  }

  double quartic_sum(const Vec<D>& u) const {
    const double r2 = u.squaredNorm();
    return u.array().square().square().sum() + eps_ * r2 * r2;
  }

  Vec<D> quartic_grad(const Vec<D>& u) const {
    return 4.0 * u.array().cube().matrix() + 4.0 * eps_ * u.squaredNorm() * u;
  }

  Vec<D> fd_grad(const Vec<D>& u) const {
    const double h = kFdStep * std::max(1.0, u.norm());
    Vec<D> g;
    for (int i = 0; i < D; ++i) {
      g[i] = detail::richardson_diff_scalar(
          [&](double t) {
            Vec<D> w = u;
            w[i] += t;
            return value_unchecked(w);
          },
          h);
    }
    return g;
  }

  Mat<D> fd_hess(const Vec<D>& u) const {
    Mat<D> h;
    if (grad_) {
      const double step = kFdStep * std::max(1.0, u.norm());
      for (int j = 0; j < D; ++j) {
        h.col(j) = detail::richardson_diff(
            [&](double t) {
              Vec<D> w = u;
              w[j] += t;
              return grad_(w);
            },
            step);
      }
    } else {
      // Second differences of the value; a coarser step keeps roundoff near 1e-10.
      const double step = kFdHessStep * std::max(1.0, u.norm());
      auto second = [&](int i, int j, double s) {
        auto f = [&](double a, double b) {
          Vec<D> w = u;
          w[i] += a;
          w[j] += b;
          return value_unchecked(w);
        };
        if (i == j) return (f(s, 0) - 2.0 * value_unchecked(u) + f(-s, 0)) / (s * s);
        return (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s);
      };
      for (int i = 0; i < D; ++i) {
        for (int j = i; j < D; ++j) {
          const double v = (4.0 * second(i, j, 0.5 * step) - second(i, j, step)) / 3.0;
          h(i, j) = v;
          h(j, i) = v;
        }
      }
    }
    return 0.5 * (h + h.transpose());
  }

  NormFamily family_ = NormFamily::Euclidean;
  std::string name_;
  Mat<D> a_ = Mat<D>::Identity();
  Mat<D> a_inv_ = Mat<D>::Identity();
  double eps_ = 0.0;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

/// Orthonormal basis of the orthogonal complement of a unit vector, as columns.
template <int D>
Eigen::Matrix<double, D, D - 1> orthogonal_complement(const Vec<D>& u) {
  Eigen::HouseholderQR<Eigen::Matrix<double, D, 1>> qr(u);
  const Mat<D> q = qr.householderQ() * Mat<D>::Identity();
  return q.template rightCols<D - 1>();
}

/// Smallest eigenvalue of D^2F(u) restricted to the tangent space of the unit
/// sphere at u. For a 1-homogeneous F this restriction equals the spherical
/// Hessian plus F(u) I, so a positive value means F is elliptic at u.
template <int D>
double check_ellipticity(const MinkowskiNorm<D>& norm, const Vec<D>& u) {
  require_nonzero<D>(u, "check_ellipticity");
  if (std::abs(u.norm() - 1.0) > 1e-8) {
    throw Error(ErrorKind::InvalidArgument, "check_ellipticity expects a unit direction");
  }
  const auto basis = orthogonal_complement<D>(u);
  const Eigen::Matrix<double, D - 1, D - 1> restricted = basis.transpose() * norm.hess(u) * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D - 1, D - 1>> es(
      0.5 * (restricted + restricted.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct NormIdentityResiduals {
  /// max |<grad F(u), u> - F(u)|
  double euler = 0.0;
  /// max |D^2F(u) u|_inf
  double radial_kernel = 0.0;
  /// max |F(tu) - t F(u)| / (t F(u)) over t in {0.5, 2, 10}
  double homogeneity = 0.0;
  double min_ellipticity = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
};

/// The defining identities at `count` quasi-random directions, with lengths
/// spread over [0.5, 2] so homogeneity errors are not hidden by |u| = 1.
template <int D>
NormIdentityResiduals check_norm_identities(const MinkowskiNorm<D>& norm, std::size_t count, std::uint64_t seed = 0) {
  NormIdentityResiduals r;
  SphereSequence<D> dirs(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec<D> dir = dirs.next();
    const double len = 0.5 + 1.5 * radical_inverse(i + 1, 37);
    const Vec<D> u = len * dir;
    const double fu = norm.eval(u);
    r.euler = std::max(r.euler, std::abs(norm.grad(u).dot(u) - fu));
    r.radial_kernel = std::max(r.radial_kernel, (norm.hess(u) * u).cwiseAbs().maxCoeff());
    for (double t : {0.5, 2.0, 10.0}) r.homogeneity = std::max(r.homogeneity, std::abs(norm.eval(t * u) - t * fu) / (t * fu));
    r.min_ellipticity = std::min(r.min_ellipticity, check_ellipticity(norm, dir));
    ++r.samples;
  }
  return r;
}

}  // namespace wulffkit
