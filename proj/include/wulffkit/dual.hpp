#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "wulffkit/norm.hpp"
#include "wulffkit/sampling.hpp"

namespace wulffkit {

enum class DualMode { ClosedForm, Numeric };

template <int D>
struct DualValue {
  double value = 0.0;
  /// Maximizer of <u, v> / F(u), scaled so that F(maximizer) = 1.
  Vec<D> maximizer = Vec<D>::Zero();
  int iterations = 0;
};

/// The polar gauge F°(v) = sup_{u != 0} <u, v> / F(u).
///
/// Euclidean and quadratic bases use closed forms. Everything else is solved
/// numerically: a coarse scan over a fixed sphere grid picks a start, then
/// projected gradient ascent with Armijo backtracking refines it until the
/// tangential gradient drops below `grad_tol`.
template <int D>
class DualNorm {
 public:
  struct Options {
    double grad_tol = 1e-10;
    int max_iter = 20000;
    /// Coarse grid size; 0 selects 2^10 for D = 2 and 2^12 otherwise.
    std::size_t grid = 0;
  };

  explicit DualNorm(const MinkowskiNorm<D>& base) : DualNorm(base, default_mode(base), Options{}) {}

  DualNorm(const MinkowskiNorm<D>& base, DualMode mode, Options opts = Options{})
      : base_(std::make_shared<const MinkowskiNorm<D>>(base)), mode_(mode), opts_(opts) {
    if (mode_ == DualMode::ClosedForm && base.family() != NormFamily::Euclidean &&
        base.family() != NormFamily::Quadratic) {
      throw Error(ErrorKind::InvalidArgument, "closed-form dual only exists for euclidean/quadratic norms");
    }
    if (mode_ == DualMode::Numeric) {
      const std::size_t count = opts_.grid != 0 ? opts_.grid : (D == 2 ? 1024u : 4096u);
      grid_ = std::make_shared<const std::vector<Vec<D>>>(sphere_grid<D>(count));
    }
  }

  static DualMode default_mode(const MinkowskiNorm<D>& base) {
    return (base.family() == NormFamily::Euclidean || base.family() == NormFamily::Quadratic) ? DualMode::ClosedForm
                                                                                                : DualMode::Numeric;
  }

  const MinkowskiNorm<D>& base() const noexcept { return *base_; }
  DualMode mode() const noexcept { return mode_; }
  const Options& options() const noexcept { return opts_; }

  DualValue<D> eval(const Vec<D>& v) const {
    require_nonzero<D>(v, "dual eval");
    if (mode_ == DualMode::ClosedForm) return closed_form(v);
    return numeric(v);
  }

  double value(const Vec<D>& v) const { return eval(v).value; }

  /// Envelope theorem: the gradient of a support function is the maximizer.
  Vec<D> grad(const Vec<D>& v) const {
    require_nonzero<D>(v, "dual grad");
    if (mode_ == DualMode::ClosedForm) {
      if (base_->family() == NormFamily::Euclidean) return v / v.norm();
      const Vec<D> w = base_->matrix_inverse() * v;
      return w / std::sqrt(v.dot(w));
    }
    return numeric(v).maximizer;
  }

 private:
  DualValue<D> closed_form(const Vec<D>& v) const {
    DualValue<D> out;
    if (base_->family() == NormFamily::Euclidean) {
      out.value = v.norm();
      out.maximizer = v / out.value;
    } else {
      const Vec<D> w = base_->matrix_inverse() * v;
      out.value = std::sqrt(v.dot(w));
      out.maximizer = w / out.value;
    }
    return out;
  }

  DualValue<D> numeric(const Vec<D>& v) const {
    const double scale = v.norm();
    const Vec<D> w = v / scale;
    const MinkowskiNorm<D>& f = *base_;
    auto objective = [&](const Vec<D>& u) { return u.dot(w) / f.eval(u); };
    auto tangential_grad = [&](const Vec<D>& u) {
      const double fu = f.eval(u);
      Vec<D> g = w / fu - (u.dot(w) / (fu * fu)) * f.grad(u);
      g -= g.dot(u) * u;
      return g;
    };

    Vec<D> u = grid_->front();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& cand : *grid_) {
      const double val = objective(cand);
      if (val > best) {
        best = val;
        u = cand;
      }
    }

    double value = best;
    Vec<D> g = tangential_grad(u);
    double gnorm = g.norm();
    double step = 1.0;
    int it = 0;
    constexpr double kArmijo = 1e-4;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon();
    while (gnorm >= opts_.grad_tol && it < opts_.max_iter) {
      ++it;
      bool accepted = false;
      bool roundoff = false;
      double t = std::min(step * 2.0, 1e6);
      for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
        const Vec<D> cand = (u + t * g).normalized();
        const double cv = objective(cand);
        const double gain = cv - value;
        if (std::abs(gain) <= noise * std::abs(value)) {
          roundoff = true;
          break;
        }
        if (gain >= kArmijo * t * gnorm * gnorm) {
          u = cand;
          value = cv;
          g = tangential_grad(u);
          gnorm = g.norm();
          step = t;
          accepted = true;
          break;
        }
      }
      if (!accepted && roundoff) {
        // Objective differences are below roundoff while the gradient is not:
        // take a Newton step on the tangent space, Jacobian by differences.
        const Eigen::Matrix<double, D, D - 1> basis = orthogonal_complement<D>(u);
        auto reduced = [&](const Vec<D - 1>& y) {
          return Vec<D - 1>(basis.transpose() * tangential_grad((u + basis * y).normalized()));
        };
        const double h = 1e-6;
        Mat<D - 1> jac;
        for (int k = 0; k < D - 1; ++k) {
          const Vec<D - 1> e = Vec<D - 1>::Unit(k) * h;
          jac.col(k) = (reduced(e) - reduced(-e)) / (2.0 * h);
        }
        const Vec<D - 1> y = -jac.fullPivLu().solve(reduced(Vec<D - 1>::Zero()));
        const Vec<D> cand = (u + basis * y).normalized();
        const Vec<D> cg = tangential_grad(cand);
        if (y.allFinite() && cg.norm() < gnorm) {
          u = cand;
          value = std::max(value, objective(cand));
          g = cg;
          gnorm = cg.norm();
          accepted = true;
        }
      }
      if (!accepted) break;
    }
    if (gnorm >= opts_.grad_tol) {
      throw Error(ErrorKind::NonConvergence,
                  "dual ascent stalled with tangential gradient " + detail::format_sci(gnorm));
    }
    DualValue<D> out;
    const double fu = f.eval(u);
    out.maximizer = u / fu;
    out.value = scale * out.maximizer.dot(w);
    out.iterations = it;
    return out;
  }

  std::shared_ptr<const MinkowskiNorm<D>> base_;
  DualMode mode_;
  Options opts_;
  std::shared_ptr<const std::vector<Vec<D>>> grid_;
};

template <int D>
struct WulffPoint {
  Vec<D> direction;
  Vec<D> point;
};

/// The point grad F(u) of the Wulff shape {F° = 1} with outer normal u.
template <int D>
WulffPoint<D> wulff_point(const MinkowskiNorm<D>& norm, const Vec<D>& u) {
  require_nonzero<D>(u, "wulff_point");
  if (std::abs(u.norm() - 1.0) > 1e-8) throw Error(ErrorKind::InvalidArgument, "wulff_point expects a unit direction");
  return {u, norm.grad(u)};
}

/// Wraps a dual norm as a Minkowski norm so it can be dualized again.
template <int D>
MinkowskiNorm<D> as_norm(const DualNorm<D>& dual) {
  return MinkowskiNorm<D>::custom(
      "dual-of-" + dual.base().name(), [dual](const Vec<D>& v) { return dual.value(v); },
      [dual](const Vec<D>& v) { return dual.grad(v); });
}

/// A positively 1-homogeneous function φ >= 0 with gradient, used to clip
/// integration regions to sublevel sets {φ < r}.
template <int D>
struct Gauge {
  std::string name;
  std::function<double(const Vec<D>&)> value;
  std::function<Vec<D>(const Vec<D>&)> grad;

  static Gauge euclidean() {
    return {"euclidean", [](const Vec<D>& x) { return x.norm(); },
            [](const Vec<D>& x) {
              require_nonzero<D>(x, "gauge grad");
              return Vec<D>(x / x.norm());
            }};
  }

  static Gauge from_dual(const DualNorm<D>& dual) {
    return {"dual-" + dual.base().name(),
            [dual](const Vec<D>& x) { return x.norm() < kZeroFloor ? 0.0 : dual.value(x); },
            [dual](const Vec<D>& x) { return dual.grad(x); }};
  }

  static Gauge from_norm(const MinkowskiNorm<D>& norm) {
    return {norm.name(), [norm](const Vec<D>& x) { return x.norm() < kZeroFloor ? 0.0 : norm.eval(x); },
            [norm](const Vec<D>& x) { return norm.grad(x); }};
  }
};

}  // namespace wulffkit
