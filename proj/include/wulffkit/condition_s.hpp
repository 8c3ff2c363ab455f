#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "wulffkit/dual.hpp"
#include "wulffkit/sampling.hpp"

namespace wulffkit {

inline constexpr double kSignDeadband = 1e-8;
inline constexpr double kZeroLhs = 1e-6;

template <int D>
struct PairReport {
  Vec<D> u = Vec<D>::Zero();
  Vec<D> v = Vec<D>::Zero();
  /// <grad F(u), grad F°(v)>
  double lhs = 0.0;
  /// <u, v> for the normalized pair
  double rhs_sign_ref = 0.0;
  /// lhs - <u, v> / (F(u) F°(v)); zero for quadratic norms
  double fk_residual = 0.0;
  double lhs_sign = 0.0;
  double ref_sign = 0.0;
  /// > 0 means the pair breaks Condition S under the dead-band rules.
  double violation = 0.0;
};

/// Evaluates both sides of the sign condition and the Ferone-Kawohl residual
/// for one pair. Inputs are normalized first so the report is scale-invariant.
template <int D>
PairReport<D> pair_report(const MinkowskiNorm<D>& norm, const DualNorm<D>& dual, const Vec<D>& u, const Vec<D>& v,
                          double eps_sign = kSignDeadband, double delta_zero = kZeroLhs) {
  require_nonzero<D>(u, "pair_report u");
  require_nonzero<D>(v, "pair_report v");
  PairReport<D> r;
  r.u = u.normalized();
  r.v = v.normalized();
  const auto dv = dual.eval(r.v);
  r.lhs = norm.grad(r.u).dot(dv.maximizer);
  r.rhs_sign_ref = r.u.dot(r.v);
  r.fk_residual = r.lhs - r.rhs_sign_ref / (norm.eval(r.u) * dv.value);
  r.lhs_sign = sign_with_deadband(r.lhs, eps_sign);
  r.ref_sign = sign_with_deadband(r.rhs_sign_ref, eps_sign);
  if (r.ref_sign != 0.0) {
    // Sign-carrying pair: measure how far lhs sits on the wrong side.
    r.violation = r.lhs_sign == r.ref_sign ? -std::abs(r.lhs) : std::max(eps_sign - r.lhs * r.ref_sign, 0.0);
  } else {
    r.violation = std::abs(r.lhs) - delta_zero;
  }
  return r;
}

template <int D>
struct ConditionSVerdict {
  bool pass = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_fk_residual = 0.0;
  /// Pairs ordered from most to least adversarial (at most `keep_worst`).
  std::vector<PairReport<D>> worst;
};

/// Scans quasi-random unit pairs. A pair with |<u,v>| >= eps_sign must have a
/// lhs of the same sign; a near-orthogonal pair must have |lhs| < delta_zero.
template <int D>
ConditionSVerdict<D> check_condition_s(const MinkowskiNorm<D>& norm, std::size_t sample_count,
                                       double eps_sign = kSignDeadband, std::uint64_t seed = 0,
                                       double delta_zero = kZeroLhs, std::size_t keep_worst = 10) {
  if (sample_count < 1) throw Error(ErrorKind::InvalidArgument, "check_condition_s needs sample_count >= 1");
  const DualNorm<D> dual(norm);
  SphereSequence<D> us(seed, 0);
  SphereSequence<D> vs(seed, static_cast<std::size_t>(D));
  ConditionSVerdict<D> verdict;
  verdict.samples = sample_count;
  auto worse = [](const PairReport<D>& a, const PairReport<D>& b) { return a.violation > b.violation; };
  for (std::size_t i = 0; i < sample_count; ++i) {
    const auto rep = pair_report<D>(norm, dual, us.next(), vs.next(), eps_sign, delta_zero);
    verdict.max_fk_residual = std::max(verdict.max_fk_residual, std::abs(rep.fk_residual));
    if (rep.violation > 0.0) {
      ++verdict.violations;
      verdict.pass = false;
    }
    if (verdict.worst.size() < keep_worst || worse(rep, verdict.worst.back())) {
      verdict.worst.insert(std::upper_bound(verdict.worst.begin(), verdict.worst.end(), rep, worse), rep);
      if (verdict.worst.size() > keep_worst) verdict.worst.pop_back();
    }
  }
  return verdict;
}

template <int D>
struct ViolationSearch {
  PairReport<D> worst;
  /// lhs * sgn<u, v> at the best pair; negative means Condition S fails.
  double objective = 0.0;
  bool converged = true;
};

/// Multi-start local descent on lhs * sgn<u,v> over pairs with |<u,v>| >= eps_sign.
///
/// The second direction is parametrized through the Wulff map: for
/// v = grad F(w) one has grad F°(v) = w / F(w), so the objective needs no
/// dual solves. The final pair is re-evaluated with the real dual.
template <int D>
ViolationSearch<D> search_violation(const MinkowskiNorm<D>& norm, std::size_t starts = 16,
                                    double eps_sign = kSignDeadband, std::uint64_t seed = 0, int max_iter = 200) {
  struct State {
    Vec<D> u, w;
  };
  auto ref = [&](const State& s) { return s.u.dot(norm.grad(s.w).normalized()); };
  auto objective = [&](const State& s, double sgn) { return sgn * norm.grad(s.u).dot(s.w) / norm.eval(s.w); };

  SphereSequence<D> us(seed, 0);
  SphereSequence<D> ws(seed, static_cast<std::size_t>(D));
  ViolationSearch<D> best;
  best.objective = std::numeric_limits<double>::infinity();
  State best_state{};

  for (std::size_t start = 0; start < starts; ++start) {
    State s{us.next(), ws.next()};
    double sgn = sign_with_deadband(ref(s), eps_sign);
    if (sgn == 0.0) continue;
    double val = objective(s, sgn);
    double step = 0.5;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      // Tangential finite-difference gradient on S^{D-1} x S^{D-1}.
      const auto bu = orthogonal_complement<D>(s.u);
      const auto bw = orthogonal_complement<D>(s.w);
      Eigen::Matrix<double, D - 1, 1> gu, gw;
      constexpr double h = 1e-6;
      for (int k = 0; k < D - 1; ++k) {
        State p = s, m = s;
        p.u = (s.u + h * bu.col(k)).normalized();
        m.u = (s.u - h * bu.col(k)).normalized();
        gu[k] = (objective(p, sgn) - objective(m, sgn)) / (2 * h);
        p = s;
        m = s;
        p.w = (s.w + h * bw.col(k)).normalized();
        m.w = (s.w - h * bw.col(k)).normalized();
        gw[k] = (objective(p, sgn) - objective(m, sgn)) / (2 * h);
      }
      const double gnorm = std::sqrt(gu.squaredNorm() + gw.squaredNorm());
      if (gnorm < 1e-8) {
        converged = true;
        break;
      }
      bool moved = false;
      for (double t = std::min(2.0 * step, 1.0); t > 1e-14; t *= 0.5) {
        State c{(s.u - t * bu * gu).normalized(), (s.w - t * bw * gw).normalized()};
        if (sgn * ref(c) < eps_sign) continue;
        const double cv = objective(c, sgn);
        if (cv <= val - 1e-4 * t * gnorm * gnorm) {
          s = c;
          val = cv;
          step = t;
          moved = true;
          break;
        }
      }
      if (!moved) {
        // Either a constrained optimum at the dead band or a roundoff floor.
        converged = true;
        break;
      }
    }
    if (val < best.objective) {
      best.objective = val;
      best.converged = converged;
      best_state = s;
    }
  }
  if (!std::isfinite(best.objective)) {
    throw Error(ErrorKind::InvalidArgument, "search_violation: every start fell inside the dead band");
  }
  const DualNorm<D> dual(norm);
  best.worst = pair_report<D>(norm, dual, best_state.u, norm.grad(best_state.w), eps_sign);
  return best;
}

}  // namespace wulffkit
