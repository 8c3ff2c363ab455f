#include <gtest/gtest.h>

#include "wulffkit/quadrature.hpp"

using namespace wulffkit;

namespace {

const Integrand<2> kOne2 = [](const PointFrame<2>&) { return 1.0; };
const Integrand<1> kOne1 = [](const PointFrame<1>&) { return 1.0; };

}  // namespace

TEST(GaussLegendre, ExactForPolynomials) {
  for (int order : {2, 4, 6, 8}) {
    const GaussLegendre gl(order);
    double wsum = 0.0;
    for (double w : gl.weights) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    for (int deg = 0; deg <= 2 * order - 1; ++deg) {
      double q = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) q += gl.weights[i] * std::pow(gl.nodes[i], deg);
      const double exact = deg % 2 == 0 ? 2.0 / (deg + 1) : 0.0;
      EXPECT_NEAR(q, exact, 1e-14) << "order " << order << " degree " << deg;
    }
  }
  EXPECT_THROW(GaussLegendre(1), Error);
}

TEST(Integrate, SphereArea) {
  const double area = integrate<2>(surfaces::sphere(), kOne2, ParamQuadrature{8, 32});
  EXPECT_NEAR(area, 4 * kPi, 1e-8 * 4 * kPi);
}

TEST(Integrate, CircleLength) {
  EXPECT_NEAR(integrate<1>(surfaces::circle(1.0), kOne1), 2 * kPi, 1e-10);
}

TEST(Integrate, CatenoidBandArea) {
  // int_{-1}^{1} 2π cosh^2 v dv
  const double exact = 2 * kPi * (1.0 + std::sinh(1.0) * std::cosh(1.0));
  EXPECT_NEAR(integrate<2>(surfaces::catenoid(1.0), kOne2), exact, 1e-9 * exact);
}

TEST(Integrate, EstimateBoundsError) {
  const auto r = integrate_with_estimate<2>(surfaces::ellipsoid(1.0, 1.3, 1.7), kOne2, ParamQuadrature{4, 4});
  const double reference = integrate<2>(surfaces::ellipsoid(1.0, 1.3, 1.7), kOne2, ParamQuadrature{8, 64});
  EXPECT_LE(std::abs(r.value - reference), 3.0 * r.estimate + 1e-12);
  EXPECT_GT(r.estimate, 0.0);
}

TEST(Clipped, DiskArea) {
  const auto plane = surfaces::hyperplane(Vec<3>::Zero(), Vec<3>(0.2, -0.3, 1.0), 2.0);
  for (double r : {0.5, 1.0, 1.7}) {
    const auto res = integrate_clipped<2>(plane, kOne2, {Gauge<3>::euclidean(), 0.0, r, 10});
    EXPECT_NEAR(res.value, kPi * r * r, 1e-4 * kPi * r * r);
    EXPECT_TRUE(res.depth_exhausted);
    EXPECT_GT(res.straddling_leaves, 0u);
  }
}

TEST(Clipped, AnnulusChordLength) {
  const double d = 0.5, s = 0.7, r = 1.6;
  const auto line = surfaces::line(Vec<2>(0, d), Vec<2>(1, 0), 3.0);
  const auto res = integrate_clipped<1>(line, kOne1, {Gauge<2>::euclidean(), s, r, -1});
  EXPECT_NEAR(res.value, 2 * (std::sqrt(r * r - d * d) - std::sqrt(s * s - d * d)), 1e-6);
  EXPECT_LT(res.estimate, 1e-4);
}

TEST(Clipped, WholePatchInside) {
  const auto c = surfaces::catenoid(1.0);
  const auto res = integrate_clipped<2>(c, kOne2, {Gauge<3>::euclidean(), 0.0, 100.0, 8});
  EXPECT_NEAR(res.value, integrate<2>(c, kOne2), 1e-12);
  EXPECT_EQ(res.straddling_leaves, 0u);
  EXPECT_EQ(res.estimate, 0.0);
}

TEST(Clipped, InvalidRegion) {
  const auto c = surfaces::circle(1.0);
  EXPECT_THROW(integrate_clipped<1>(c, kOne1, {Gauge<2>::euclidean(), 1.0, 0.5, -1}), Error);
  EXPECT_THROW(integrate_clipped<1>(c, kOne1, {Gauge<2>::euclidean(), -0.1, 0.5, -1}), Error);
}

TEST(SublevelEnergy, PlaneThroughOrigin) {
  const auto q = MinkowskiNorm<3>::quadratic(Vec<3>(1, 2, 3).asDiagonal().toDenseMatrix());
  const auto plane = surfaces::hyperplane(Vec<3>::Zero(), Vec<3>(0, 0, 1), 2.0);
  // F(nu) = sqrt 3 and the dual ball meets the plane in the ellipse x^2 + y^2/2 < r^2.
  const double r = 0.8;
  const auto e = sublevel_energy<2>(plane, q, r);
  const double exact = std::sqrt(3.0) * kPi * r * r * std::sqrt(2.0);
  EXPECT_NEAR(e.value, exact, 1e-4 * exact);
  EXPECT_THROW(sublevel_energy<2>(plane, q, 0.0), Error);
}
