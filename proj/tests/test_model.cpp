#include <cmath>

#include <gtest/gtest.h>

#include "coas/error.hpp"
#include "coas/fixtures.hpp"
#include "coas/model.hpp"
#include "coas/montecarlo.hpp"
#include "support.hpp"

namespace coas {
namespace {

using testing::random_surrogate;
using testing::unit_box;

double f1(const Eigen::VectorXd& x) { return fixtures::poly(x, 0.0); }
double f2(const Eigen::VectorXd& x) { return fixtures::poly(x, 3.0); }
double linear_x1(const Eigen::VectorXd& x) { return 1.5 + 2.0 * x(0); }
double hinge_target(const Eigen::VectorXd& x) {
  return 1.0 + 3.0 * std::max(x(0) - 0.4, 0.0) - 2.0 * std::max(0.7 - x(1), 0.0);
}

TEST(HingeFactor, ValueAndRightDerivative) {
  const HingeFactor up{0, 1, 0.5}, down{0, -1, 0.5};
  EXPECT_DOUBLE_EQ(up.value(0.75), 0.25);
  EXPECT_DOUBLE_EQ(up.value(0.25), 0.0);
  EXPECT_DOUBLE_EQ(down.value(0.25), 0.25);
  EXPECT_DOUBLE_EQ(up.slope(0.5), 1.0);
  EXPECT_DOUBLE_EQ(down.slope(0.5), 0.0);
  EXPECT_DOUBLE_EQ(down.slope(0.4999), -1.0);
}

TEST(MarsSurrogate, ConstantModel) {
  const auto m = MarsSurrogate::constant(unit_box(3), 2.0);
  EXPECT_DOUBLE_EQ(m.evaluate(Eigen::Vector3d(0.1, 0.9, 0.4)), 2.0);
  EXPECT_TRUE(m.gradient(Eigen::Vector3d(0.1, 0.9, 0.4)).isZero());
}

TEST(MarsSurrogate, SingleHinge) {
  const MarsSurrogate m(unit_box(1), 0.0, {{1.0, {{0, 1, 0.5}}}});
  EXPECT_DOUBLE_EQ(m.evaluate(Eigen::VectorXd::Constant(1, 0.75)), 0.25);
  const MarsSurrogate m2(unit_box(1), 0.0, {{2.0, {{0, 1, 0.5}}}});
  EXPECT_DOUBLE_EQ(m2.gradient(Eigen::VectorXd::Constant(1, 0.75))(0), 2.0);
}

TEST(MarsSurrogate, IdentityOnUnitInterval) {
  const MarsSurrogate m(unit_box(1), 0.0, {{1.0, {{0, 1, 0.0}}}});
  EXPECT_DOUBLE_EQ(m.evaluate(Eigen::VectorXd::Constant(1, 0.3)), 0.3);
}

TEST(MarsSurrogate, ProductRule) {
  const MarsSurrogate m(unit_box(2), 1.0, {{3.0, {{0, 1, 0.2}, {1, -1, 0.8}}}});
  const Eigen::Vector2d x(0.5, 0.3);
  EXPECT_NEAR(m.evaluate(x), 1.0 + 3.0 * 0.3 * 0.5, 1e-15);
  const Eigen::VectorXd g = m.gradient(x);
  EXPECT_NEAR(g(0), 3.0 * 0.5, 1e-15);
  EXPECT_NEAR(g(1), -3.0 * 0.3, 1e-15);
}

TEST(MarsSurrogate, RejectsInvalidStructure) {
  const Domain d = unit_box(2);
  EXPECT_THROW(MarsSurrogate(d, 0.0, {{1.0, {{2, 1, 0.5}}}}), DimensionError);
  EXPECT_THROW(MarsSurrogate(d, 0.0, {{1.0, {{0, 1, 0.5}, {0, -1, 0.2}}}}),
               std::invalid_argument);
  EXPECT_THROW(MarsSurrogate(d, 0.0, {{1.0, {{0, 2, 0.5}}}}), std::invalid_argument);
  EXPECT_THROW(MarsSurrogate(d, 0.0, {{1.0, {}}}), std::invalid_argument);
  EXPECT_THROW(MarsSurrogate(Domain{}, 0.0, {}), DimensionError);
  EXPECT_THROW(MarsSurrogate(Domain{{1.0, 0.0}}, 0.0, {}), std::invalid_argument);
  const MarsSurrogate m(d, 0.0, {{1.0, {{0, 1, 0.5}}}});
  EXPECT_THROW(m.evaluate(Eigen::Vector3d::Zero()), DimensionError);
  EXPECT_THROW(m.gradient(Eigen::VectorXd::Zero(1)), DimensionError);
}

TEST(MarsSurrogate, CoefficientScalingIsLinear) {
  Rng rng(4);
  const auto m = random_surrogate(rng, unit_box(3), 8, 3);
  std::vector<BasisTerm> scaled = m.terms();
  for (auto& t : scaled) t.coef *= -2.5;
  const MarsSurrogate s(m.domain(), m.intercept(), scaled);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d x(rng.uniform(), rng.uniform(), rng.uniform());
    EXPECT_NEAR(s.evaluate(x) - s.intercept(), -2.5 * (m.evaluate(x) - m.intercept()), 1e-12);
  }
}

TEST(MarsSurrogate, GradientMatchesCentralDifferences) {
  Rng rng(8);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + static_cast<int>(rng.below(4));
    const auto m = random_surrogate(rng, unit_box(p), 10, 3);
    for (int k = 0; k < 100;) {
      Eigen::VectorXd x(p);
      for (int i = 0; i < p; ++i) x(i) = rng.uniform();
      bool near = false;
      for (const auto& t : m.terms()) {
        for (const auto& f : t.factors) near |= std::abs(x(f.var) - f.knot) < 10 * h;
      }
      if (near) continue;
      const Eigen::VectorXd g = m.gradient(x);
      for (int i = 0; i < p; ++i) {
        Eigen::VectorXd a = x, b = x;
        a(i) += h;
        b(i) -= h;
        EXPECT_NEAR((m.evaluate(a) - m.evaluate(b)) / (2 * h), g(i), 1e-6);
      }
      ++k;
    }
  }
}

TEST(MarsSurrogate, EvaluateRowsMatchesEvaluate) {
  Rng rng(9);
  const auto m = random_surrogate(rng, unit_box(2), 6, 2);
  const Eigen::MatrixXd X = lhs_design(20, 2, unit_box(2), 1);
  const Eigen::VectorXd y = m.evaluate_rows(X);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(y(i), m.evaluate(X.row(i).transpose()));
}

TEST(Fit, LinearResponseIsExact) {
  const Eigen::MatrixXd X = lhs_design(100, 2, unit_box(2), 3);
  FitConfig cfg;
  cfg.max_degree = 1;
  const auto r = fit(X, testing::sample_response(X, linear_x1), unit_box(2), cfg);
  EXPECT_LT(r.rmse, 1e-6);
  EXPECT_LE(r.model.max_degree(), 1);
}

TEST(Fit, ConstantResponse) {
  const Eigen::MatrixXd X = lhs_design(30, 2, unit_box(2), 3);
  const auto r = fit(X, Eigen::VectorXd::Constant(30, 4.0), unit_box(2));
  EXPECT_TRUE(r.constant_response);
  EXPECT_TRUE(r.model.terms().empty());
  EXPECT_DOUBLE_EQ(r.model.intercept(), 4.0);
}

TEST(Fit, RespectsLimits) {
  const Eigen::MatrixXd X = lhs_design(300, 2, unit_box(2), 3);
  FitConfig cfg;
  cfg.max_terms = 7;
  cfg.max_degree = 1;
  const auto r = fit(X, testing::sample_response(X, f2), unit_box(2), cfg);
  EXPECT_LE(r.model.terms().size(), 7u);
  EXPECT_LE(r.model.max_degree(), 1);
  EXPECT_THROW(fit(X.topRows(3), Eigen::VectorXd::Zero(3), unit_box(2)), std::invalid_argument);
  EXPECT_THROW(fit(X, Eigen::VectorXd::Zero(10), unit_box(2)), DimensionError);
}

TEST(Fit, QuadraticTargetGradientAtCenter) {
  const Eigen::MatrixXd X = lhs_design(500, 2, unit_box(2), 5);
  const auto r = fit(X, testing::sample_response(X, f1), unit_box(2));
  EXPECT_GT(r.r2, 0.9999);
  const Eigen::VectorXd g = r.model.gradient(Eigen::Vector2d(0.5, 0.5));
  EXPECT_NEAR(g(0), 1.5, 0.05);
  EXPECT_NEAR(g(1), 0.5, 0.05);
}

TEST(Fit, IsDeterministic) {
  const Eigen::MatrixXd X = lhs_design(200, 2, unit_box(2), 5);
  const Eigen::VectorXd y = testing::sample_response(X, f2);
  EXPECT_EQ(fit(X, y, unit_box(2)).model, fit(X, y, unit_box(2)).model);
}

TEST(Fit, RecoversHingeTarget) {
  const Eigen::MatrixXd X = lhs_design(200, 2, unit_box(2), 6);
  const auto r = fit(X, testing::sample_response(X, hinge_target), unit_box(2));
  EXPECT_LT(r.rmse, 1e-8);
}

TEST(Fit, RefitOfOwnPredictionsIsIdempotent) {
  const Eigen::MatrixXd X = lhs_design(200, 2, unit_box(2), 6);
  for (auto* target : {linear_x1, hinge_target, f1}) {
    const auto first = fit(X, testing::sample_response(X, target), unit_box(2)).model;
    const Eigen::VectorXd yhat = first.evaluate_rows(X);
    const auto second = fit(X, yhat, unit_box(2)).model;
    EXPECT_LT((second.evaluate_rows(X) - yhat).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Fit, KnotsRescaleToNativeDomain) {
  const Domain d = {{100.0, 300.0}, {-5.0, 5.0}};
  const Eigen::MatrixXd X = lhs_design(200, 2, d, 2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y(i) = 0.01 * std::max(X(i, 0) - 180.0, 0.0) + X(i, 1);
  const auto r = fit(X, y, d);
  EXPECT_LT(r.rmse, 1e-8);
  for (const auto& t : r.model.terms()) {
    for (const auto& f : t.factors) {
      EXPECT_GE(f.knot, d[f.var].lo);
      EXPECT_LE(f.knot, d[f.var].hi);
    }
  }
}

TEST(FitEnsemble, MemberZeroIsFullFit) {
  const Eigen::MatrixXd X = lhs_design(150, 2, unit_box(2), 7);
  const Eigen::VectorXd y = testing::sample_response(X, f1);
  FitConfig cfg;
  cfg.max_terms = 15;
  const auto e = fit_ensemble(X, y, unit_box(2), cfg, 4, 11, "f1");
  ASSERT_EQ(e.size(), 4u);
  EXPECT_EQ(e.members()[0].terms(), fit(X, y, unit_box(2), cfg).model.terms());
  EXPECT_EQ(e.label(), "f1");
  for (const auto& m : e.members()) EXPECT_EQ(m.p(), 2);
  EXPECT_FALSE(e.members()[1] == e.members()[2]);
}

TEST(FitEnsemble, SingleMemberAndReproducibility) {
  const Eigen::MatrixXd X = lhs_design(100, 2, unit_box(2), 7);
  const Eigen::VectorXd y = testing::sample_response(X, f2);
  FitConfig cfg;
  cfg.max_terms = 11;
  EXPECT_EQ(fit_ensemble(X, y, unit_box(2), cfg, 1, 3).size(), 1u);
  const auto a = fit_ensemble(X, y, unit_box(2), cfg, 5, 3, "m", 1);
  const auto b = fit_ensemble(X, y, unit_box(2), cfg, 5, 3, "m", 3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a.members()[i], b.members()[i]);
  EXPECT_THROW(fit_ensemble(X, y, unit_box(2), cfg, 0, 3), std::invalid_argument);
}

TEST(Ensemble, RejectsMixedDomains) {
  EXPECT_THROW(Ensemble("x", {}), std::invalid_argument);
  EXPECT_THROW(Ensemble("x", {MarsSurrogate::constant(unit_box(2), 1.0),
                              MarsSurrogate::constant(unit_box(3), 1.0)}),
               DimensionError);
}

TEST(CrossValidation, SmallForWellModelledResponse) {
  const Eigen::MatrixXd X = lhs_design(200, 2, unit_box(2), 8);
  const double e = cv_rmspe(X, testing::sample_response(X, f1), unit_box(2), {}, 5, 1);
  EXPECT_GE(e, 0.0);
  EXPECT_LT(e, 0.05);
  EXPECT_THROW(cv_rmspe(X, testing::sample_response(X, f1), unit_box(2), {}, 1, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace coas
