#include <cmath>

#include <gtest/gtest.h>

#include "coas/closedform.hpp"
#include "coas/error.hpp"
#include "coas/montecarlo.hpp"
#include "oracle/quadrature.hpp"
#include "support.hpp"

namespace coas {
namespace {

using testing::random_surrogate;
using testing::unit_box;

double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

TEST(IntegrationBounds, FourSignCases) {
  const HingeFactor up3{0, 1, 0.3}, up6{0, 1, 0.6}, dn3{0, -1, 0.3}, dn6{0, -1, 0.6};
  Bounds b = integration_bounds(&up3, &up6);
  EXPECT_EQ(b.a, 0.6);
  EXPECT_EQ(b.b, kInf);
  b = integration_bounds(&up3, &dn6);
  EXPECT_EQ(b.a, 0.3);
  EXPECT_EQ(b.b, 0.6);
  b = integration_bounds(&dn6, &up3);
  EXPECT_EQ(b.a, 0.3);
  EXPECT_EQ(b.b, 0.6);
  b = integration_bounds(&dn3, &dn6);
  EXPECT_EQ(b.a, -kInf);
  EXPECT_EQ(b.b, 0.3);
}

TEST(IntegrationBounds, DisjointSupportsCollapse) {
  const HingeFactor up6{0, 1, 0.6}, dn3{0, -1, 0.3};
  const Bounds b = integration_bounds(&up6, &dn3);
  EXPECT_EQ(b.a, b.b);
  EXPECT_EQ(integral_i2(&up6, &dn3, Marginal(Uniform{0, 1})), 0.0);
  EXPECT_EQ(integral_i3(&up6, &dn3, Marginal(Normal{0.5, 1})), 0.0);
}

TEST(IntegrationBounds, AbsentFactor) {
  const HingeFactor dn4{0, -1, 0.4};
  Bounds b = integration_bounds(&dn4, nullptr);
  EXPECT_EQ(b.a, -kInf);
  EXPECT_EQ(b.b, 0.4);
  b = integration_bounds(nullptr, nullptr);
  EXPECT_EQ(b.a, -kInf);
  EXPECT_EQ(b.b, kInf);
}

TEST(Integrals, HandValuesOnUnitUniform) {
  const Marginal u(Uniform{0, 1});
  const HingeFactor up{0, 1, 0.5}, dn{0, -1, 0.5};
  EXPECT_NEAR(integral_i2(&up, &up, u), 1.0 / 24.0, 1e-15);
  EXPECT_NEAR(integral_i3(&up, &up, u), 0.5, 1e-15);
  EXPECT_NEAR(integral_i3(&dn, &dn, u), 0.5, 1e-15);
  EXPECT_NEAR(integral_i1(&up, nullptr, u), 0.5, 1e-15);
  EXPECT_NEAR(integral_i1(&up, &up, u), 0.125, 1e-15);
  EXPECT_NEAR(integral_i4(&up, u), 0.5, 1e-15);
  EXPECT_NEAR(integral_i4(&dn, u), -0.5, 1e-15);
  EXPECT_NEAR(integral_i5(&up, u), 0.125, 1e-15);
  EXPECT_EQ(integral_i2(nullptr, nullptr, u), 1.0);
  EXPECT_EQ(integral_i5(nullptr, u), 1.0);
}

// Every 1-D integral against direct quadrature of its defining integrand.
TEST(Integrals, MatchQuadratureOverRandomFactors) {
  Rng rng(21);
  const std::vector<Marginal> laws = {Marginal(Uniform{0, 1}), Marginal(Normal{0.4, 0.3}),
                                      Marginal(Normal{0.5, 0.2, 0.1, 0.8})};
  auto value = [](const HingeFactor* f, double x) { return f ? f->value(x) : 1.0; };
  auto slope = [](const HingeFactor* f, double x) { return f ? f->slope(x) : 0.0; };
  for (const auto& mu : laws) {
    for (int t = 0; t < 60; ++t) {
      HingeFactor a{0, rng.uniform() < 0.5 ? 1 : -1, rng.uniform()};
      HingeFactor b{0, rng.uniform() < 0.5 ? 1 : -1, rng.uniform()};
      const HingeFactor* fk = t % 5 == 0 ? nullptr : &a;
      const HingeFactor* fl = t % 7 == 0 ? nullptr : &b;
      std::vector<double> br = {a.knot, b.knot};
      const auto [lo, hi] = mu.support();
      auto q = [&](auto g) {
        return oracle::integrate_scalar([&](double x) { return g(x) * mu.pdf(x); }, lo, hi, br);
      };
      const double i1 = q([&](double x) { return slope(fk, x) * value(fl, x); });
      const double i2 = q([&](double x) { return value(fk, x) * value(fl, x); });
      const double i3 = q([&](double x) { return slope(fk, x) * slope(fl, x); });
      EXPECT_NEAR(integral_i1(fk, fl, mu), i1, 1e-12);
      EXPECT_NEAR(integral_i2(fk, fl, mu), i2, 1e-12);
      EXPECT_NEAR(integral_i3(fk, fl, mu), i3, 1e-12);
      EXPECT_NEAR(integral_i4(fk, mu), q([&](double x) { return slope(fk, x); }), 1e-12);
      EXPECT_NEAR(integral_i5(fk, mu), q([&](double x) { return value(fk, x); }), 1e-12);
    }
  }
}

TEST(Cmat, LinearModelGivesOuterProduct) {
  const Domain d = unit_box(3);
  const MarsSurrogate m(d, 0.0, {{2.0, {{0, 1, 0.0}}}, {-1.0, {{1, 1, 0.0}}}, {0.5, {{2, -1, 1.0}}}});
  const auto C = cmat(m, m, InputPrior::uniform_box(3));
  Eigen::Vector3d a(2.0, -1.0, -0.5);
  EXPECT_LT(rel_error(C.entries, a * a.transpose()), 1e-15);
  EXPECT_NEAR(C.trace, a.squaredNorm(), 1e-14);
  EXPECT_TRUE(C.is_self());
}

TEST(Cmat, SingleHinge) {
  const MarsSurrogate m(unit_box(1), 0.0, {{1.0, {{0, 1, 0.5}}}});
  EXPECT_NEAR(cmat(m, m, InputPrior::uniform_box(1)).entries(0, 0), 0.5, 1e-15);
}

TEST(Cmat, ConstantModelGivesZero) {
  const auto c = MarsSurrogate::constant(unit_box(2), 3.0);
  Rng rng(1);
  const auto m = random_surrogate(rng, unit_box(2), 5, 2);
  EXPECT_TRUE(cmat(c, m, InputPrior::uniform_box(2)).entries.isZero());
  EXPECT_EQ(cotrace(c, c, InputPrior::uniform_box(2)), 0.0);
}

TEST(Cmat, TransposeIdentityAndTrace) {
  Rng rng(2);
  const auto prior = InputPrior::uniform_box(4);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_surrogate(rng, unit_box(4), 12, 3, "a");
    const auto b = random_surrogate(rng, unit_box(4), 9, 3, "b");
    const auto ab = cmat(a, b, prior), ba = cmat(b, a, prior);
    EXPECT_LT(rel_error(ab.entries, ba.entries.transpose()), 1e-14);
    EXPECT_NEAR(cotrace(a, b, prior), ab.entries.trace(), 1e-12 * ab.entries.norm());
    EXPECT_EQ(ab.label_k, "a");
    EXPECT_EQ(ab.label_l, "b");
    EXPECT_FALSE(ab.is_self());
  }
}

TEST(Cmat, SelfMatrixIsSymmetricPsd) {
  Rng rng(3);
  const auto m = random_surrogate(rng, unit_box(4), 15, 3);
  const Eigen::MatrixXd C = cmat(m, m, InputPrior::uniform_box(4)).entries;
  EXPECT_LT(rel_error(C, C.transpose()), 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
}

class CmatQuadrature : public ::testing::TestWithParam<int> {};

TEST_P(CmatQuadrature, MatchesNestedQuadrature) {
  const int p = GetParam();
  Rng rng(100 + p);
  const std::vector<InputPrior> priors = {
      InputPrior::uniform_box(p),
      InputPrior(std::vector<Marginal>(p, Marginal(Normal{0.5, 0.3}))),
      InputPrior(std::vector<Marginal>(p, Marginal(Normal{0.4, 0.25, 0.0, 1.0})))};
  for (const auto& prior : priors) {
    for (int t = 0; t < (p == 3 ? 1 : 3); ++t) {
      const auto a = random_surrogate(rng, unit_box(p), 5, p);
      const auto b = random_surrogate(rng, unit_box(p), 5, p);
      const Eigen::MatrixXd Q = oracle::cmat_by_quadrature(a, b, prior);
      EXPECT_LT(rel_error(cmat(a, b, prior).entries, Q), 1e-9);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, CmatQuadrature, ::testing::Values(1, 2, 3));

TEST(Cmat, MatchesMonteCarloInHigherDimension) {
  Rng rng(5);
  const Domain d = unit_box(6);
  const auto prior = InputPrior::uniform_box(6);
  const auto a = random_surrogate(rng, d, 20, 3);
  const auto b = random_surrogate(rng, d, 20, 3);
  const auto mc = mc_cmat(SampledFunction::from_surrogate(a), SampledFunction::from_surrogate(b),
                          prior, 200000, 9);
  const Eigen::MatrixXd C = cmat(a, b, prior).entries;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      EXPECT_LE(std::abs(C(i, j) - mc.estimate.entries(i, j)), 5.0 * mc.se(i, j) + 1e-12);
    }
  }
}

TEST(Cmat, StableFarFromOrigin) {
  const Domain d = {{1e6, 1e6 + 1.0}};
  const MarsSurrogate m(d, 0.0, {{1.0, {{0, 1, 1e6 + 0.25}}}, {2.0, {{0, -1, 1e6 + 0.75}}}});
  const InputPrior prior({Marginal(Uniform{1e6, 1e6 + 1.0})});
  // Squared slope is 4, 1, 1 on the three cells.
  EXPECT_NEAR(cmat(m, m, prior).entries(0, 0), 1.75, 1e-9);
}

TEST(Cmat, DimensionMismatchThrows) {
  const auto m = MarsSurrogate::constant(unit_box(2), 0.0);
  EXPECT_THROW(cmat(m, m, InputPrior::uniform_box(3)), DimensionError);
}

TEST(ExpectedGradient, MatchesQuadrature) {
  Rng rng(6);
  const InputPrior prior({Marginal(Normal{0.5, 0.3}), Marginal(Uniform{0, 1})});
  const auto m = random_surrogate(rng, unit_box(2), 8, 2);
  const Eigen::VectorXd z = expected_gradient(m, prior);
  for (int i = 0; i < 2; ++i) {
    // Partner with unit slope wherever the prior has mass.
    const MarsSurrogate ramp(Domain(2, Interval{-100.0, 100.0}), 0.0,
                             {{1.0, {{i, 1, -100.0}}}});
    EXPECT_NEAR(z(i), oracle::cmat_by_quadrature(m, ramp, prior)(i, i), 1e-9);
  }
}

TEST(CmatModified, AddsExpectedGradientOuterProduct) {
  Rng rng(7);
  const auto prior = InputPrior::uniform_box(3);
  const auto a = random_surrogate(rng, unit_box(3), 6, 2);
  const auto b = random_surrogate(rng, unit_box(3), 6, 2);
  const auto mod = cmat_modified(a, b, prior);
  const Eigen::MatrixXd want = cmat(a, b, prior).entries +
                               expected_gradient(a, prior) * expected_gradient(b, prior).transpose();
  EXPECT_LT(rel_error(mod.entries, want), 1e-14);
  EXPECT_EQ(mod.kind, MatrixKind::modified);
}

TEST(CmatModified, ZeroMeanGradientLeavesMatrixUnchanged) {
  // f = (x - 1/2)^2 as hinges has E[f'] = 0 under U[0, 1].
  const MarsSurrogate m(unit_box(1), 0.0,
                        {{1.0, {{0, 1, 0.5}}}, {1.0, {{0, -1, 0.5}}}});
  const auto prior = InputPrior::uniform_box(1);
  EXPECT_NEAR(expected_gradient(m, prior)(0), 0.0, 1e-15);
  EXPECT_NEAR(cmat_modified(m, m, prior).entries(0, 0), cmat(m, m, prior).entries(0, 0), 1e-15);
}

}  // namespace
}  // namespace coas
