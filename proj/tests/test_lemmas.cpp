#include <gtest/gtest.h>

#include "wulffkit/dual.hpp"
#include "wulffkit/lemmas.hpp"

using namespace wulffkit;

namespace {

Mat<3> sample_matrix() {
  Mat<3> a;
  a << 1.5, 0.2, 0.1, 0.2, 1.0, -0.15, 0.1, -0.15, 0.7;
  return a;
}

double worst_lemma_residual(const ParametricPatch<2>& patch, const TransversalField<2>& xi, int grid) {
  const Vec<3> b(0.3, -0.5, 0.8);
  const auto fx = [](const ParametricPatch<2>& pa, const Param<2>& q) { return pa.position(q).dot(Vec<3>(1, 2, -1)); };
  double worst = 0.0;
  for (const auto& p : patch.sample_grid(grid)) {
    const auto frame = frame_at(patch, p);
    if (std::abs(xi.at(patch, p).dot(frame.nu)) <= 1e-2) continue;
    const auto dx = check_lemma_DX_top<2>(patch, xi, fields::position<2>(), p);
    const auto cp = check_lemma_const_and_position<2>(patch, xi, p, b);
    const double prod = check_lemma_product<2>(patch, xi, fx, fields::constant<2>(b), p);
    const auto sa = check_self_adjoint<2>(frame, equiaffine_frame(patch, xi, frame));
    const double cod = codazzi_residual<2>(patch, xi, p);
    for (double r : {dx.matrix, dx.trace, cp.b, cp.x, prod, sa[0], sa[1], cod}) worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace

TEST(LemmaDXTop, ConstantFieldOnSphere) {
  const auto s = surfaces::sphere();
  const auto xi = TransversalField<2>::anisotropic(MinkowskiNorm<3>::quadratic(sample_matrix()));
  for (const auto& p : s.sample_grid(5)) {
    const auto r = check_lemma_DX_top<2>(s, xi, fields::constant<2>(Vec<3>(1, -2, 0.5)), p);
    EXPECT_LT(r.matrix, 1e-5);
    EXPECT_LT(r.trace, 1e-5);
  }
}

TEST(LemmaDXTop, PositionOnHyperplane) {
  const auto h = surfaces::hyperplane(Vec<3>(0.2, 0, 0.1), Vec<3>(0, 0, 1), 1.0);
  const auto xi = TransversalField<2>::constant(Vec<3>(0.3, 0.1, 1.0));
  const auto r = check_lemma_DX_top<2>(h, xi, fields::position<2>(), Param<2>(0.3, -0.4));
  EXPECT_LT(r.matrix, 1e-8);
  EXPECT_LT(r.trace, 1e-8);
}

TEST(LemmaDXTop, PositionOnEllipsoid) {
  const auto e = surfaces::ellipsoid(1.0, 1.3, 1.7);
  const auto xi = TransversalField<2>::anisotropic(MinkowskiNorm<3>::quadratic(sample_matrix()));
  for (const auto& p : e.sample_grid(5)) EXPECT_LT(check_lemma_DX_top<2>(e, xi, fields::position<2>(), p).matrix, 1e-5);
}

TEST(LemmaConstPosition, Examples) {
  const auto h = surfaces::hyperplane(Vec<3>(0, 0, 0.5), Vec<3>(0, 0, 1), 1.0);
  const auto hr = check_lemma_const_and_position<2>(h, TransversalField<2>::constant(Vec<3>(0.2, 0, 1)),
                                                    Param<2>(0.1, 0.2), Vec<3>(1, 1, 1));
  EXPECT_LT(hr.b, 1e-8);
  EXPECT_LT(hr.x, 1e-8);

  const auto s = surfaces::sphere();
  EXPECT_LT(check_lemma_const_and_position<2>(s, TransversalField<2>::euclidean_normal(), Param<2>(1.0, 0.5),
                                              Vec<3>(1, 0, 0))
                .x,
            1e-6);

  const auto c = surfaces::catenoid(1.0);
  const auto xi = TransversalField<2>::anisotropic(MinkowskiNorm<3>::quadratic(sample_matrix()));
  for (const auto& p : c.sample_grid(5)) {
    const auto r = check_lemma_const_and_position<2>(c, xi, p, Vec<3>(0.3, -0.2, 0.9));
    EXPECT_LT(r.b, 1e-5);
    EXPECT_LT(r.x, 1e-5);
  }
}

TEST(LemmaProduct, Examples) {
  const auto s = surfaces::sphere();
  const auto nu = TransversalField<2>::euclidean_normal();
  const ScalarField<2> one = [](const ParametricPatch<2>&, const Param<2>&) { return 1.0; };
  EXPECT_LT(check_lemma_product<2>(s, nu, one, fields::position<2>(), Param<2>(0.7, 0.2)), 1e-8);

  const Vec<3> c(0.4, -0.1, 0.7);
  const ScalarField<2> lin = [c](const ParametricPatch<2>& pa, const Param<2>& q) { return pa.position(q).dot(c); };
  EXPECT_LT(check_lemma_product<2>(s, nu, lin, fields::constant<2>(Vec<3>(1, 2, 3)), Param<2>(1.3, 4.0)), 1e-6);

  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const DualNorm<3> dual(q);
  const ScalarField<2> gauge = [dual](const ParametricPatch<2>& pa, const Param<2>& p) {
    return dual.value(pa.position(p));
  };
  const auto e = surfaces::ellipsoid(1.0, 1.3, 1.7);
  EXPECT_LT(check_lemma_product<2>(e, TransversalField<2>::anisotropic(q), gauge, fields::position<2>(),
                                   Param<2>(0.9, 2.2)),
            1e-5);
}

TEST(SelfAdjoint, HoldsForEquiaffineFields) {
  const auto e = surfaces::ellipsoid(1.0, 1.3, 1.7);
  const auto xi = TransversalField<2>::anisotropic(MinkowskiNorm<3>::quadratic(sample_matrix()));
  for (const auto& p : e.sample_grid(5)) {
    const auto frame = frame_at(e, p);
    for (double r : check_self_adjoint<2>(frame, equiaffine_frame(e, xi, frame), 3)) EXPECT_LT(r, 1e-6);
  }
}

TEST(Codazzi, SphereAndCurves) {
  const auto s = surfaces::sphere();
  EXPECT_LT(codazzi_residual<2>(s, TransversalField<2>::euclidean_normal(), Param<2>(1.0, 1.0)), 1e-6);
  EXPECT_EQ(codazzi_residual<1>(surfaces::circle(1.0), TransversalField<1>::euclidean_normal(), Param<1>(0.5)), 0.0);
}

TEST(LemmaSuite, NineByNineGrid) {
  const auto q = MinkowskiNorm<3>::quadratic(sample_matrix());
  const std::vector<TransversalField<2>> fields = {TransversalField<2>::euclidean_normal(),
                                                   TransversalField<2>::anisotropic(q),
                                                   TransversalField<2>::constant(Vec<3>(0.2, -0.1, 1.0))};
  for (const auto& patch : {surfaces::sphere(), surfaces::ellipsoid(1.0, 1.3, 1.7), surfaces::catenoid(1.0)})
    for (const auto& xi : fields) EXPECT_LT(worst_lemma_residual(patch, xi, 9), 1e-4) << patch.name() << " " << xi.name;
}
