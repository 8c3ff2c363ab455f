#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wulffkit/core.hpp"

namespace wulffkit {

/// Radical inverse of `index` in the given prime base.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv_base = 1.0 / static_cast<double>(base);
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

inline constexpr std::array<std::uint64_t, 12> kHaltonPrimes = {2, 3, 5, 7, 11, 13,
                                                                17, 19, 23, 29, 31, 37};

/// Low-discrepancy sequence of unit vectors in R^D.
///
/// D = 2 maps one Halton coordinate to an angle, D = 3 uses the area-preserving
/// cylinder map; other dimensions push Halton points through Box-Muller.
/// `seed` offsets the sequence so distinct seeds give disjoint point sets.
template <int D>
class SphereSequence {
 public:
  explicit SphereSequence(std::uint64_t seed = 0, std::size_t first_prime = 0)
      : index_(seed * 7919 + 1), prime0_(first_prime) {}

  Vec<D> next() {
    const std::uint64_t i = index_++;
    auto h = [&](std::size_t k) { return radical_inverse(i, kHaltonPrimes[(prime0_ + k) % kHaltonPrimes.size()]); };
    Vec<D> out;
    if constexpr (D == 2) {
      const double t = 2.0 * kPi * h(0);
      out << std::cos(t), std::sin(t);
    } else if constexpr (D == 3) {
      const double z = 1.0 - 2.0 * h(0);
      const double t = 2.0 * kPi * h(1);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      out << rho * std::cos(t), rho * std::sin(t), z;
    } else {
      for (int k = 0; k < D; k += 2) {
        const double a = std::max(h(k), 1e-300);
        const double b = h(k + 1);
        const double rad = std::sqrt(-2.0 * std::log(a));
        out[k] = rad * std::cos(2.0 * kPi * b);
        if (k + 1 < D) out[k + 1] = rad * std::sin(2.0 * kPi * b);
      }
      out.normalize();
    }
    return out;
  }

 private:
  std::uint64_t index_;
  std::size_t prime0_;
};

/// Deterministic, roughly uniform grid of `count` unit vectors.
template <int D>
std::vector<Vec<D>> sphere_grid(std::size_t count) {
  std::vector<Vec<D>> pts;
  pts.reserve(count);
  if constexpr (D == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double t = 2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      pts.emplace_back(std::cos(t), std::sin(t));
    }
  } else if constexpr (D == 3) {
    // Fibonacci lattice.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = golden * static_cast<double>(i);
      pts.emplace_back(rho * std::cos(t), rho * std::sin(t), z);
    }
  } else {
    SphereSequence<D> seq(0);
    for (std::size_t i = 0; i < count; ++i) pts.push_back(seq.next());
  }
  return pts;
}

}  // namespace wulffkit
