#pragma once

#include <string>
#include <vector>

#include "wulffkit/lemmas.hpp"
#include "wulffkit/quadrature.hpp"
#include "wulffkit/symfunc.hpp"

namespace wulffkit {

/// One global identity, checked numerically. `pass` requires the residual to
/// stay within 3x the combined quadrature estimate and the surface to meet the
/// identity's hypotheses; otherwise the report is informational only.
struct IdentityReport {
  std::string name;
  std::string surface;
  std::string norm;
  double s = 0.0;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool asserted = true;
  bool pass = false;
  std::string note;
  int quad_order = 0;
  int quad_grid = 0;
  int max_depth = 0;

  bool recompute_pass() const { return asserted && residual <= 3.0 * tolerance; }
  void finalize() {
    residual = std::abs(lhs - rhs);
    pass = recompute_pass();
  }
};

struct VerifySettings {
  ParamQuadrature rule{};
  /// -1 picks the per-dimension default.
  int max_depth = -1;
  double minimality_threshold = 1e-5;
  int sample_grid = 9;

  template <int N>
  int depth() const {
    return max_depth >= 0 ? max_depth : (N == 1 ? 20 : 10);
  }
};

template <int N>
double max_abs_anisotropic_mean_curvature(const ParametricPatch<N>& patch, const MinkowskiNorm<N + 1>& norm,
                                          int grid) {
  double worst = 0.0;
  for (const auto& p : patch.sample_grid(grid))
    worst = std::max(worst, std::abs(anisotropic_mean_curvature<N>(norm, patch, p)));
  return worst;
}

template <int N>
double max_abs_affine_mean_curvature(const ParametricPatch<N>& patch, const TransversalField<N>& xi, int grid) {
  double worst = 0.0;
  for (const auto& p : patch.sample_grid(grid)) worst = std::max(worst, std::abs(equiaffine_frame(patch, xi, p).H_xi));
  return worst;
}

template <int N>
void require_boundary_outside(const ParametricPatch<N>& patch, const Gauge<N + 1>& gauge, double r) {
  for (const auto& p : patch.boundary_samples(64)) {
    if (gauge.value(patch.position(p)) < r) {
      throw Error(ErrorKind::BoundaryInsideRegion, patch.name() + " has boundary inside the gauge ball of radius " +
                                                       std::to_string(r));
    }
  }
}

/// Minimum of the gauge over the patch boundary (infinity for closed patches).
template <int N>
double boundary_gauge_radius(const ParametricPatch<N>& patch, const Gauge<N + 1>& gauge) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : patch.boundary_samples(256)) m = std::min(m, gauge.value(patch.position(p)));
  return m;
}

template <int N>
double minimum_gauge(const ParametricPatch<N>& patch, const Gauge<N + 1>& gauge, int grid = 129) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : patch.sample_grid(grid, 0.0)) m = std::min(m, gauge.value(patch.position(p)));
  return m;
}

/// `count` geometrically spaced radii strictly between the smallest gauge value
/// on the surface and the boundary gauge radius. The lower end is floored at a
/// twentieth of the upper one so patches through the origin are not sampled
/// below the quadrature resolution.
template <int N>
std::vector<double> default_radii(const ParametricPatch<N>& patch, const Gauge<N + 1>& gauge, int count = 8) {
  const double hi = boundary_gauge_radius(patch, gauge);
  const double lo = std::max(minimum_gauge(patch, gauge), 0.05 * hi);
  if (!std::isfinite(hi) || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "cannot bracket radii on " + patch.name());
  std::vector<double> radii;
  for (int i = 1; i <= count; ++i) radii.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count + 1)));
  return radii;
}

struct EnergySample {
  double r = 0.0;
  double energy = 0.0;
  double normalized = 0.0;
  double estimate = 0.0;
};

/// r -> int_{M cap rΩ} F(nu) / r^n at each radius.
template <int N>
std::vector<EnergySample> energy_scan(const ParametricPatch<N>& patch, const MinkowskiNorm<N + 1>& norm,
                                      const std::vector<double>& radii, const VerifySettings& settings = {}) {
  std::vector<EnergySample> out;
  for (double r : radii) {
    const auto e = sublevel_energy<N>(patch, norm, r, settings.rule, settings.depth<N>());
    const double rn = std::pow(r, N);
    out.push_back({r, e.value, e.value / rn, e.estimate / rn});
  }
  return out;
}

/// True when normalized energies never drop by more than 3x the combined estimates.
inline bool non_decreasing(const std::vector<EnergySample>& scan) {
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].normalized < scan[i - 1].normalized - 3.0 * (scan[i].estimate + scan[i - 1].estimate)) return false;
  }
  return true;
}

/// E(r)/r^n - E(s)/s^n against the annulus integral of
/// <grad F°(x), grad F(nu)> <x, nu> / F°(x)^{n+1}.
template <int N>
IdentityReport monotonicity_identity(const ParametricPatch<N>& patch, const MinkowskiNorm<N + 1>& norm, double s,
                                     double r, const VerifySettings& settings = {}) {
  constexpr int D = N + 1;
  if (!(s > 0.0 && s < r)) throw Error(ErrorKind::InvalidArgument, "monotonicity identity needs 0 < s < r");
  const DualNorm<D> dual(norm);
  const auto gauge = Gauge<D>::from_dual(dual);
  require_boundary_outside<N>(patch, gauge, r);

  IdentityReport rep;
  rep.name = "monotonicity";
  rep.surface = patch.name();
  rep.norm = norm.name();
  rep.s = s;
  rep.r = r;
  rep.quad_order = settings.rule.order;
  rep.quad_grid = settings.rule.grid;
  rep.max_depth = settings.depth<N>();

  const double h_max = max_abs_anisotropic_mean_curvature<N>(patch, norm, settings.sample_grid);
  if (h_max > settings.minimality_threshold) {
    rep.asserted = false;
    rep.note = "NotMinimal: max |H_nuF| = " + std::to_string(h_max);
  }

  const auto er = sublevel_energy<N>(patch, norm, r, settings.rule, rep.max_depth);
  const auto es = sublevel_energy<N>(patch, norm, s, settings.rule, rep.max_depth);
  const double rn = std::pow(r, N), sn = std::pow(s, N);
  rep.lhs = er.value / rn - es.value / sn;

  ClippedRegionRule<D> annulus{gauge, s, r, rep.max_depth};
  const auto kernel = integrate_clipped<N>(
      patch,
      [&](const PointFrame<N>& fr) {
        const auto dv = dual.eval(fr.x);
        return dv.maximizer.dot(norm.grad(fr.nu)) * fr.x.dot(fr.nu) / std::pow(dv.value, N + 1);
      },
      annulus, settings.rule);
  rep.rhs = kernel.value;
  rep.tolerance = er.estimate / rn + es.estimate / sn + kernel.estimate;
  rep.finalize();
  return rep;
}

/// Same identity for a general transversal field xi and gauge φ: density
/// <xi, nu>, kernel <x, nu> <grad φ(x), xi> / φ(x)^{n+1}.
template <int N>
IdentityReport equiaffine_identity(const ParametricPatch<N>& patch, const TransversalField<N>& xi,
                                   const Gauge<N + 1>& phi, double s, double r, const VerifySettings& settings = {}) {
  constexpr int D = N + 1;
  if (!(s > 0.0 && s < r)) throw Error(ErrorKind::InvalidArgument, "equiaffine identity needs 0 < s < r");
  require_boundary_outside<N>(patch, phi, r);

  IdentityReport rep;
  rep.name = "equiaffine";
  rep.surface = patch.name();
  rep.norm = xi.name + "/" + phi.name;
  rep.s = s;
  rep.r = r;
  rep.quad_order = settings.rule.order;
  rep.quad_grid = settings.rule.grid;
  rep.max_depth = settings.depth<N>();

  const double h_max = max_abs_affine_mean_curvature<N>(patch, xi, settings.sample_grid);
  if (h_max > settings.minimality_threshold) {
    rep.asserted = false;
    rep.note = "NotMinimal: max |H_xi| = " + std::to_string(h_max);
  }

  auto density = [&](const PointFrame<N>& fr) { return xi.at(patch, fr.p).dot(fr.nu); };
  const auto er = integrate_clipped<N>(patch, density, ClippedRegionRule<D>{phi, 0.0, r, rep.max_depth}, settings.rule);
  const auto es = integrate_clipped<N>(patch, density, ClippedRegionRule<D>{phi, 0.0, s, rep.max_depth}, settings.rule);
  const double rn = std::pow(r, N), sn = std::pow(s, N);
  rep.lhs = er.value / rn - es.value / sn;

  const auto kernel = integrate_clipped<N>(
      patch,
      [&](const PointFrame<N>& fr) {
        const double g = phi.value(fr.x);
        return fr.x.dot(fr.nu) * phi.grad(fr.x).dot(xi.at(patch, fr.p)) / std::pow(g, N + 1);
      },
      ClippedRegionRule<D>{phi, s, r, rep.max_depth}, settings.rule);
  rep.rhs = kernel.value;
  rep.tolerance = er.estimate / rn + es.estimate / sn + kernel.estimate;
  rep.finalize();
  return rep;
}

struct DivergenceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// div_M of V = x^{T_xi} / (n φ^n) by finite differences, against
/// <x,nu><grad φ, xi>/φ^{n+1} + <x,nu> H_xi / (n φ^n). The H_xi term keeps
/// the identity valid on surfaces that are not minimal.
template <int N>
DivergenceCheck pointwise_divergence_V(const ParametricPatch<N>& patch, const TransversalField<N>& xi,
                                       const Gauge<N + 1>& phi, const Param<N>& p) {
  constexpr int D = N + 1;
  const auto frame = frame_at(patch, p);
  const double g = phi.value(frame.x);
  if (!(g > kZeroFloor)) throw Error(ErrorKind::GaugeZero, "gauge vanishes at the sample point");
  const auto ef = equiaffine_frame(patch, xi, frame);
  DivergenceCheck c;
  c.lhs = surface_divergence<N>(
      patch,
      [&](const Param<N>& q) {
        const Vec<D> x = patch.position(q);
        return Vec<D>(affine_tangential<D>(x, xi.at(patch, q), patch.normal(q)) / (N * std::pow(phi.value(x), N)));
      },
      p);
  const double x_nu = frame.x.dot(frame.nu);
  c.rhs = x_nu * phi.grad(frame.x).dot(ef.xi) / std::pow(g, N + 1) + x_nu * ef.H_xi / (N * std::pow(g, N));
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

/// Parameter point where the patch passes through the origin, by a grid
/// search followed by Gauss-Newton on X(p) = 0.
template <int N>
Param<N> locate_origin(const ParametricPatch<N>& patch, double tol = 1e-8) {
  Param<N> best = Param<N>::Zero();
  double best_norm = std::numeric_limits<double>::infinity();
  for (const auto& p : patch.sample_grid(33, 0.0)) {
    const double d = patch.position(p).norm();
    if (d < best_norm) {
      best_norm = d;
      best = p;
    }
  }
  for (int it = 0; it < 50 && best_norm > 1e-15; ++it) {
    const auto j = patch.jet(best);
    const Param<N> step = (j.jac.transpose() * j.jac).ldlt().solve(j.jac.transpose() * j.x);
    best -= step;
    best_norm = patch.position(best).norm();
    if (step.norm() < 1e-16) break;
  }
  if (!(best_norm <= tol)) throw Error(ErrorKind::OriginNotOnSurface, patch.name() + " misses the origin");
  return best;
}

/// Flat patch through the origin spanning the tangent space with normal nu.
template <int N>
ParametricPatch<N> tangent_hyperplane(const Vec<N + 1>& nu, double half_width) {
  if constexpr (N == 1) {
    return surfaces::line(Vec<2>::Zero(), Vec<2>(nu[1], -nu[0]), half_width);
  } else {
    return surfaces::hyperplane(Vec<3>::Zero(), nu, half_width);
  }
}

struct CorollaryReport {
  double energy = 0.0;
  double energy_estimate = 0.0;
  /// F(nu(0)) |Ω cap T_0 M|
  double bound = 0.0;
  double bound_estimate = 0.0;
  double ratio = 0.0;
  /// Relative tolerance of the ratio.
  double tolerance = 0.0;
  bool asserted = true;
  /// ratio >= 1 - 3 tolerance
  bool ratio_at_least_one = false;
  std::string note;
};

/// int_{M cap Ω} F(nu) against F(nu(0)) |Ω cap T_0 M| for a patch through the
/// origin whose boundary lies outside the Wulff shape.
template <int N>
CorollaryReport corollary_lower_bound(const ParametricPatch<N>& patch, const MinkowskiNorm<N + 1>& norm,
                                      const VerifySettings& settings = {}) {
  constexpr int D = N + 1;
  const Param<N> p0 = locate_origin(patch);
  const DualNorm<D> dual(norm);
  const auto gauge = Gauge<D>::from_dual(dual);
  require_boundary_outside<N>(patch, gauge, 1.0);

  CorollaryReport rep;
  const double h_max = max_abs_anisotropic_mean_curvature<N>(patch, norm, settings.sample_grid);
  if (h_max > settings.minimality_threshold) {
    rep.asserted = false;
    rep.note = "NotMinimal: max |H_nuF| = " + std::to_string(h_max);
  }
  const auto energy = sublevel_energy<N>(patch, norm, 1.0, settings.rule, settings.depth<N>());
  rep.energy = energy.value;
  rep.energy_estimate = energy.estimate;

  const Vec<D> nu0 = patch.normal(p0);
  // Ω lies in the ball whose radius is the largest support value.
  double circumradius = 0.0;
  for (const auto& u : sphere_grid<D>(D == 2 ? 1024 : 4096)) circumradius = std::max(circumradius, norm.eval(u));
  const auto plane = tangent_hyperplane<N>(nu0, 1.25 * circumradius);
  const auto section = integrate_clipped<N>(
      plane, [](const PointFrame<N>&) { return 1.0; }, ClippedRegionRule<D>{gauge, 0.0, 1.0, settings.depth<N>()},
      settings.rule);
  const double f0 = norm.eval(nu0);
  rep.bound = f0 * section.value;
  rep.bound_estimate = f0 * section.estimate;
  rep.ratio = rep.energy / rep.bound;
  rep.tolerance = rep.energy_estimate / rep.bound + rep.bound_estimate / rep.bound;
  rep.ratio_at_least_one = rep.ratio >= 1.0 - 3.0 * rep.tolerance;
  return rep;
}

/// int <xi, nu> H~_k against -int <x, nu> H~_{k+1} on a closed patch.
template <int N>
IdentityReport minkowski_formula(const ParametricPatch<N>& patch, const TransversalField<N>& xi, int k,
                                 const VerifySettings& settings = {}, double tau_threshold = 1e-5) {
  if (!patch.domain().closed()) throw Error(ErrorKind::NotClosed, patch.name() + " is not closed");
  if (k < 0 || k > N - 1) throw Error(ErrorKind::IndexOutOfRange, "minkowski formula needs 0 <= k <= n-1");
  double tau_max = 0.0;
  for (const auto& p : patch.sample_grid(settings.sample_grid))
    tau_max = std::max(tau_max, equiaffine_frame(patch, xi, p).tau.cwiseAbs().maxCoeff());
  if (tau_max > tau_threshold) {
    throw Error(ErrorKind::NotEquiaffine, xi.name + " has |tau| = " + std::to_string(tau_max));
  }

  // Each side is integrated on the base and doubled grids, and once more on the
  // base grid with a doubled finite-difference step for D xi. The estimate sums
  // both differences, since S carries differencing noise that grid refinement
  // alone does not see.
  auto side = [&](int order, bool position_side) {
    auto integrand = [&](double step) {
      return Integrand<N>([&, step, order, position_side](const PointFrame<N>& fr) {
        const auto ef = equiaffine_frame(patch, xi, fr, step);
        const double hk = normalized_k_curvature(DenseMatrix(ef.S), order);
        return position_side ? -fr.x.dot(fr.nu) * hk : ef.support * hk;
      });
    };
    const double coarse = integrate<N>(patch, integrand(kFdParamStep), settings.rule);
    const double fine = integrate<N>(patch, integrand(kFdParamStep), ParamQuadrature{settings.rule.order, 2 * settings.rule.grid});
    const double rough = integrate<N>(patch, integrand(2.0 * kFdParamStep), settings.rule);
    return QuadResult{fine, std::abs(fine - coarse) + std::abs(rough - coarse)};
  };
  const auto lhs = side(k, false);
  const auto rhs = side(k + 1, true);

  IdentityReport rep;
  rep.name = "minkowski-k" + std::to_string(k);
  rep.surface = patch.name();
  rep.norm = xi.name;
  rep.lhs = lhs.value;
  rep.rhs = rhs.value;
  rep.tolerance = lhs.estimate + rhs.estimate;
  rep.quad_order = settings.rule.order;
  rep.quad_grid = 2 * settings.rule.grid;
  rep.finalize();
  return rep;
}

}  // namespace wulffkit
