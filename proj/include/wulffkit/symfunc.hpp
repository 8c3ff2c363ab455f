#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "wulffkit/core.hpp"

namespace wulffkit {

/// Square, not necessarily symmetric, matrix.
using DenseMatrix = Eigen::MatrixXd;

namespace detail {

inline void require_square(const DenseMatrix& a, const char* where) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, std::string(where) + ": matrix must be square");
}

inline void require_k(const DenseMatrix& a, int k, const char* where) {
  require_square(a, where);
  if (k < 0 || k > a.rows()) {
    throw Error(ErrorKind::IndexOutOfRange, std::string(where) + ": k out of range");
  }
}

/// Parity of the permutation that sorts `v`; 0 if `v` has a repeated entry.
inline int permutation_sign(std::vector<int> v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j + 1 < v.size() - i; ++j) {
      if (v[j] == v[j + 1]) return 0;
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        sign = -sign;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] == v[i + 1]) return 0;
  return sign;
}

}  // namespace detail

/// Generalized Kronecker delta: the sign of the permutation taking `lower` to
/// `upper` when `lower` has distinct entries and `upper` is a rearrangement of
/// it, else 0.
inline int generalized_kronecker(const std::vector<int>& upper, const std::vector<int>& lower) {
  if (upper.size() != lower.size()) return 0;
  const int sl = detail::permutation_sign(lower);
  if (sl == 0) return 0;
  const int su = detail::permutation_sign(upper);
  if (su == 0) return 0;
  auto a = upper, b = lower;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) return 0;
  return sl * su;
}

/// Coefficients sigma_0..sigma_n of det(lambda I - A) = sum_k (-1)^k sigma_k lambda^{n-k},
/// by the Faddeev-LeVerrier trace recursion.
inline std::vector<double> sigma_all(const DenseMatrix& a) {
  detail::require_square(a, "sigma_all");
  const Eigen::Index n = a.rows();
  std::vector<double> sigma(static_cast<std::size_t>(n) + 1, 0.0);
  sigma[0] = 1.0;
  // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k, with c_j the
  // characteristic polynomial coefficients and sigma_k = (-1)^k c_{n-k}.
  DenseMatrix m = DenseMatrix::Zero(n, n);
  double c_prev = 1.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c_prev * DenseMatrix::Identity(n, n);
    const double c = -(a * m).trace() / static_cast<double>(k);
    sigma[static_cast<std::size_t>(k)] = (k % 2 == 0 ? 1.0 : -1.0) * c;
    c_prev = c;
  }
  return sigma;
}

inline double sigma_k(const DenseMatrix& a, int k) {
  detail::require_k(a, k, "sigma_k");
  return sigma_all(a)[static_cast<std::size_t>(k)];
}

/// Sum of all k x k principal minors; combinatorial, n <= 6.
inline double sigma_k_minors_oracle(const DenseMatrix& a, int k) {
  detail::require_k(a, k, "sigma_k_minors_oracle");
  const int n = static_cast<int>(a.rows());
  if (n > 6) throw Error(ErrorKind::TooLarge, "minors oracle limited to n <= 6");
  if (k == 0) return 1.0;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  double total = 0.0;
  do {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) idx.push_back(i);
    DenseMatrix sub(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub(r, c) = a(idx[r], idx[c]);
    total += sub.determinant();
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return total;
}

/// T_0 = I, T_k = sigma_k I - T_{k-1} A.
inline DenseMatrix newton_tensor(const DenseMatrix& a, int k) {
  detail::require_k(a, k, "newton_tensor");
  const auto sigma = sigma_all(a);
  const Eigen::Index n = a.rows();
  DenseMatrix t = DenseMatrix::Identity(n, n);
  for (int j = 1; j <= k; ++j) t = sigma[static_cast<std::size_t>(j)] * DenseMatrix::Identity(n, n) - t * a;
  return t;
}

/// T_0..T_k together with sigma_0..sigma_k.
struct NewtonTensorSet {
  DenseMatrix base;
  std::vector<DenseMatrix> tensors;
  std::vector<double> sigmas;

  NewtonTensorSet(const DenseMatrix& a, int k) : base(a) {
    detail::require_k(a, k, "NewtonTensorSet");
    const auto all = sigma_all(a);
    const Eigen::Index n = a.rows();
    sigmas.assign(all.begin(), all.begin() + k + 1);
    tensors.push_back(DenseMatrix::Identity(n, n));
    for (int j = 1; j <= k; ++j) {
      tensors.push_back(sigmas[static_cast<std::size_t>(j)] * DenseMatrix::Identity(n, n) - tensors.back() * a);
    }
  }
};

/// [T_k]_{ji} = (1/k!) sum delta^{j_1..j_k j}_{i_1..i_k i} a_{i_1 j_1} ... a_{i_k j_k}.
///
/// Only distinct lower tuples contribute, and each upper tuple is a
/// rearrangement of the lower one, so the sum runs over ordered choices of
/// i_1..i_k avoiding i and over permutations of (i_1..i_k, i) ending in j.
inline DenseMatrix newton_entries_oracle(const DenseMatrix& a, int k) {
  detail::require_k(a, k, "newton_entries_oracle");
  const int n = static_cast<int>(a.rows());
  if (n > 4 || k > 3) throw Error(ErrorKind::TooLarge, "Kronecker oracle limited to n <= 4, k <= 3");
  double k_fact = 1.0;
  for (int m = 2; m <= k; ++m) k_fact *= m;

  DenseMatrix t = DenseMatrix::Zero(n, n);
  std::vector<int> lower(static_cast<std::size_t>(k));
  // Enumerate ordered k-tuples over {0..n-1}.
  const int total = static_cast<int>(std::pow(n, k));
  for (int i = 0; i < n; ++i) {
    for (int code = 0; code < total; ++code) {
      int c = code;
      for (int m = 0; m < k; ++m) {
        lower[static_cast<std::size_t>(m)] = c % n;
        c /= n;
      }
      std::vector<int> low_full = lower;
      low_full.push_back(i);
      if (detail::permutation_sign(low_full) == 0) continue;
      std::vector<int> up = low_full;
      std::sort(up.begin(), up.end());
      do {
        const int j = up.back();
        const int delta = generalized_kronecker(up, low_full);
        double prod = static_cast<double>(delta);
        for (int m = 0; m < k; ++m) prod *= a(lower[static_cast<std::size_t>(m)], up[static_cast<std::size_t>(m)]);
        t(j, i) += prod;
      } while (std::next_permutation(up.begin(), up.end()));
    }
  }
  return t / k_fact;
}

/// max_ij |[T_{k-1}]_{ji} - d sigma_k / d a_ij| with central differences.
inline double check_gradient_relation(const DenseMatrix& a, int k) {
  detail::require_square(a, "check_gradient_relation");
  if (k < 1 || k > a.rows()) throw Error(ErrorKind::IndexOutOfRange, "check_gradient_relation: 1 <= k <= n");
  const DenseMatrix t = newton_tensor(a, k - 1);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(a(i, j)));
      DenseMatrix ap = a, am = a;
      ap(i, j) += h;
      am(i, j) -= h;
      const double partial = (sigma_k(ap, k) - sigma_k(am, k)) / (2.0 * h);
      worst = std::max(worst, std::abs(t(j, i) - partial));
    }
  }
  return worst;
}

struct TraceResiduals {
  /// |sigma_k - tr(T_{k-1} A) / k|
  double euler = 0.0;
  /// |tr T_k - (n - k) sigma_k|
  double trace = 0.0;
};

inline TraceResiduals check_trace_identities(const DenseMatrix& a, int k) {
  detail::require_square(a, "check_trace_identities");
  if (k < 1 || k > a.rows()) throw Error(ErrorKind::IndexOutOfRange, "check_trace_identities: 1 <= k <= n");
  const NewtonTensorSet set(a, k);
  const double s = set.sigmas[static_cast<std::size_t>(k)];
  TraceResiduals r;
  r.euler = std::abs(s - (set.tensors[static_cast<std::size_t>(k - 1)] * a).trace() / k);
  r.trace = std::abs(set.tensors[static_cast<std::size_t>(k)].trace() - static_cast<double>(a.rows() - k) * s);
  return r;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// sigma_k(S) / C(n, k).
inline double normalized_k_curvature(const DenseMatrix& s, int k) {
  detail::require_k(s, k, "normalized_k_curvature");
  return sigma_k(s, k) / binomial(static_cast<int>(s.rows()), k);
}

}  // namespace wulffkit
