#pragma once

#include <functional>
#include <vector>

#include "wulffkit/dual.hpp"
#include "wulffkit/frame.hpp"

namespace wulffkit {

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) {
    if (order < 2) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre order must be >= 2");
    nodes.resize(static_cast<std::size_t>(order));
    weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[static_cast<std::size_t>(i)] = x;
      weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

/// Tensor Gauss-Legendre rule on a uniform grid of parameter cells.
struct ParamQuadrature {
  int order = 6;
  int grid = 16;
};

template <int N>
using Integrand = std::function<double(const PointFrame<N>&)>;

template <int N>
struct Cell {
  Param<N> lo;
  Param<N> hi;
};

namespace detail {

template <int N>
std::vector<Cell<N>> base_cells(const ParamDomain<N>& dom, int grid) {
  std::vector<Cell<N>> cells;
  if constexpr (N == 1) {
    const double w = (dom.hi[0] - dom.lo[0]) / grid;
    for (int i = 0; i < grid; ++i) cells.push_back({Param<1>(dom.lo[0] + i * w), Param<1>(dom.lo[0] + (i + 1) * w)});
  } else {
    const double w0 = (dom.hi[0] - dom.lo[0]) / grid;
    const double w1 = (dom.hi[1] - dom.lo[1]) / grid;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        cells.push_back({Param<2>(dom.lo[0] + i * w0, dom.lo[1] + j * w1),
                         Param<2>(dom.lo[0] + (i + 1) * w0, dom.lo[1] + (j + 1) * w1)});
  }
  return cells;
}

/// Applies `fn(frame, weight)` at every tensor node of `cell`.
template <int N, typename Fn>
void for_each_node(const ParametricPatch<N>& patch, const Cell<N>& cell, const GaussLegendre& gl, Fn&& fn) {
  const Param<N> half = 0.5 * (cell.hi - cell.lo);
  const Param<N> mid = 0.5 * (cell.hi + cell.lo);
  double jac = 1.0;
  for (int a = 0; a < N; ++a) jac *= half[a];
  const std::size_t m = gl.nodes.size();
  if constexpr (N == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      const Param<1> p(mid[0] + half[0] * gl.nodes[i]);
      const auto frame = frame_at(patch, p);
      fn(frame, gl.weights[i] * jac * frame.area_element);
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const Param<2> p(mid[0] + half[0] * gl.nodes[i], mid[1] + half[1] * gl.nodes[j]);
        const auto frame = frame_at(patch, p);
        fn(frame, gl.weights[i] * gl.weights[j] * jac * frame.area_element);
      }
    }
  }
}

}  // namespace detail

/// sum over nodes of weight * f * sqrt(det g).
template <int N>
double integrate(const ParametricPatch<N>& patch, const Integrand<N>& f, const ParamQuadrature& rule = {}) {
  const GaussLegendre gl(rule.order);
  double total = 0.0;
  for (const auto& cell : detail::base_cells(patch.domain(), rule.grid)) {
    detail::for_each_node(patch, cell, gl, [&](const PointFrame<N>& fr, double w) { total += w * f(fr); });
  }
  return total;
}

struct QuadResult {
  double value = 0.0;
  double estimate = 0.0;
};

/// Value on a doubled grid, with |I(grid) - I(2 grid)| as the error estimate.
template <int N>
QuadResult integrate_with_estimate(const ParametricPatch<N>& patch, const Integrand<N>& f,
                                   const ParamQuadrature& rule = {}) {
  const double coarse = integrate(patch, f, rule);
  const double fine = integrate(patch, f, ParamQuadrature{rule.order, 2 * rule.grid});
  return {fine, std::abs(fine - coarse)};
}

/// Region {s < φ < r} with φ positively 1-homogeneous; s = 0 means the whole
/// sublevel set {φ < r}.
template <int D>
struct ClippedRegionRule {
  Gauge<D> gauge;
  double s = 0.0;
  double r = 1.0;
  /// Bisection depth; -1 picks 20 for curves and 10 for surfaces.
  int max_depth = -1;
};

struct ClippedResult {
  double value = 0.0;
  /// Sum over straddling leaf cells of the cell integral of |f|.
  double estimate = 0.0;
  std::size_t straddling_leaves = 0;
  /// True when some straddling cell reached max_depth (always the case when
  /// the region boundary meets the patch).
  bool depth_exhausted = false;
};

namespace detail {

template <int N>
class ClippedIntegrator {
 public:
  static constexpr int D = N + 1;

  ClippedIntegrator(const ParametricPatch<N>& patch, const Integrand<N>& f, const ClippedRegionRule<D>& region,
                    const ParamQuadrature& rule)
      : patch_(patch), f_(f), region_(region), gl_(rule.order) {
    max_depth_ = region.max_depth >= 0 ? region.max_depth : (N == 1 ? 20 : 10);
  }

  ClippedResult run(int grid) {
    for (const auto& cell : base_cells(patch_.domain(), grid)) visit(cell, 0);
    return result_;
  }

 private:
  enum class Kind { Inside, Outside, Straddle };

  bool in_region(double phi) const { return phi < region_.r && (region_.s <= 0.0 || phi > region_.s); }

  Kind classify(const Cell<N>& cell) const {
    // Corners, center and edge midpoints: a 3^N lattice.
    std::array<double, N == 1 ? 3 : 9> phis{};
    std::array<Vec<D>, N == 1 ? 3 : 9> xs{};
    double lip = 0.0;
    std::size_t k = 0;
    auto sample = [&](const Param<N>& p) {
      const Vec<D> x = patch_.position(p);
      xs[k] = x;
      phis[k] = region_.gauge.value(x);
      if (x.norm() > kZeroFloor) lip = std::max(lip, region_.gauge.grad(x).norm());
      ++k;
    };
    const Param<N> mid = 0.5 * (cell.lo + cell.hi);
    if constexpr (N == 1) {
      sample(cell.lo);
      sample(mid);
      sample(cell.hi);
    } else {
      for (double u : {cell.lo[0], mid[0], cell.hi[0]})
        for (double v : {cell.lo[1], mid[1], cell.hi[1]}) sample(Param<2>(u, v));
    }
    const Vec<D>& center = xs[N == 1 ? 1 : 4];
    double size = 0.0;
    for (const auto& x : xs) size = std::max(size, (x - center).norm());
    // Every point of the cell lies within about half this distance of a sample.
    const double delta = region_.r * 1e-12 + 0.6 * lip * size;

    bool inside = true, above = true, below = region_.s > 0.0;
    for (double phi : phis) {
      inside = inside && phi < region_.r - delta && (region_.s <= 0.0 || phi > region_.s + delta);
      above = above && phi >= region_.r + delta;
      below = below && phi <= region_.s - delta;
    }
    if (inside) return Kind::Inside;
    if (above || below) return Kind::Outside;
    return Kind::Straddle;
  }

  void visit(const Cell<N>& cell, int depth) {
    const Kind kind = classify(cell);
    if (kind == Kind::Outside) return;
    if (kind == Kind::Inside) {
      for_each_node(patch_, cell, gl_, [&](const PointFrame<N>& fr, double w) { result_.value += w * f_(fr); });
      return;
    }
    if (depth >= max_depth_) {
      result_.depth_exhausted = true;
      ++result_.straddling_leaves;
      for_each_node(patch_, cell, gl_, [&](const PointFrame<N>& fr, double w) {
        const double val = f_(fr);
        result_.estimate += w * std::abs(val);
        if (in_region(region_.gauge.value(fr.x))) result_.value += w * val;
      });
      return;
    }
    const Param<N> mid = 0.5 * (cell.lo + cell.hi);
    if constexpr (N == 1) {
      visit({cell.lo, mid}, depth + 1);
      visit({mid, cell.hi}, depth + 1);
    } else {
      visit({cell.lo, mid}, depth + 1);
      visit({Param<2>(cell.lo[0], mid[1]), Param<2>(mid[0], cell.hi[1])}, depth + 1);
      visit({Param<2>(mid[0], cell.lo[1]), Param<2>(cell.hi[0], mid[1])}, depth + 1);
      visit({mid, cell.hi}, depth + 1);
    }
  }

  const ParametricPatch<N>& patch_;
  const Integrand<N>& f_;
  const ClippedRegionRule<D>& region_;
  GaussLegendre gl_;
  int max_depth_ = 10;
  ClippedResult result_;
};

}  // namespace detail

/// Integral of f over {s < φ(x) < r} on the patch, by adaptive bisection of
/// parameter cells that straddle the region boundary.
template <int N>
ClippedResult integrate_clipped(const ParametricPatch<N>& patch, const Integrand<N>& f,
                                const ClippedRegionRule<N + 1>& region, const ParamQuadrature& rule = {}) {
  if (!(region.s >= 0.0 && region.s < region.r)) {
    throw Error(ErrorKind::InvalidArgument, "clipped region needs 0 <= s < r");
  }
  return detail::ClippedIntegrator<N>(patch, f, region, rule).run(rule.grid);
}

/// int_{M cap {F° < r}} F(nu).
template <int N>
ClippedResult sublevel_energy(const ParametricPatch<N>& patch, const MinkowskiNorm<N + 1>& norm, double r,
                              const ParamQuadrature& rule = {}, int max_depth = -1) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "sublevel_energy needs r > 0");
  const DualNorm<N + 1> dual(norm);
  ClippedRegionRule<N + 1> region{Gauge<N + 1>::from_dual(dual), 0.0, r, max_depth};
  return integrate_clipped<N>(
      patch, [&](const PointFrame<N>& fr) { return norm.eval(fr.nu); }, region, rule);
}

}  // namespace wulffkit
