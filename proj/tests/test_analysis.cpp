#include <cmath>

#include <gtest/gtest.h>

#include "coas/analysis.hpp"
#include "coas/closedform.hpp"
#include "coas/error.hpp"
#include "support.hpp"

namespace coas {
namespace {

using testing::random_surrogate;
using testing::unit_box;

Eigen::Matrix2d poly_c1() {
  Eigen::Matrix2d c;
  c << 480, 165, 165, 60;
  return c / 180.0;
}

Eigen::Matrix2d poly_c2(double b) {
  Eigen::Matrix2d c;
  c << 480, 165 + 315 * b, 165 + 315 * b, 60 + b * (324 * b + 180);
  return c / 180.0;
}

Eigen::Matrix2d poly_c12(double b) {
  Eigen::Matrix2d c;
  c << 480, 165 + 315 * b, 165, 60 + 90 * b;
  return c / 180.0;
}

Eigen::MatrixXd random_symmetric(Rng& rng, int p) {
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = 2.0 * rng.uniform() - 1.0;
  return (A + A.transpose()) / 2.0;
}

TEST(Symmetrize, Examples) {
  Eigen::Matrix2d s;
  s << 1, 2, 2, 5;
  EXPECT_EQ(symmetrize(s), Eigen::MatrixXd(s));
  Eigen::Matrix2d c;
  c << 0, 1, 0, 0;
  Eigen::Matrix2d want;
  want << 0, 0.5, 0.5, 0;
  EXPECT_EQ(symmetrize(c), Eigen::MatrixXd(want));
  for (double b : {0.5, 3.0, -12.0}) {
    const Eigen::Matrix2d c12 = poly_c12(b);
    const Eigen::MatrixXd V = symmetrize(c12, Eigen::MatrixXd(c12.transpose()));
    EXPECT_NEAR(V(0, 1), (165 + 315 * b / 2) / 180.0, 1e-14);
    EXPECT_EQ(V(0, 1), V(1, 0));
  }
  EXPECT_THROW(symmetrize(Eigen::MatrixXd(2, 3)), DimensionError);
  EXPECT_THROW(symmetrize(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)), DimensionError);
}

TEST(Concordance, Definitions) {
  EXPECT_DOUBLE_EQ(concordance(2.0, 2.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(discordance(1.0), 0.0);
  EXPECT_DOUBLE_EQ(discordance(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(discordance(0.0), std::sqrt(0.5));
  // f against a + b f: t_kl = b t, t_l = b^2 t.
  EXPECT_DOUBLE_EQ(concordance(-3.0 * 1.7, 1.7, 9.0 * 1.7), -1.0);
  EXPECT_DOUBLE_EQ(concordance(0.5 * 1.7, 1.7, 0.25 * 1.7), 1.0);
  EXPECT_THROW(concordance(0.0, 0.0, 1.0), ConstantFunctionError);
  EXPECT_THROW(concordance(0.0, 1.0, 1e-13), ConstantFunctionError);
  EXPECT_THROW(concordance(2.0, 1.0, 1.0), std::domain_error);
  EXPECT_EQ(concordance(1.0 + 1e-13, 1.0, 1.0), 1.0);
}

TEST(Concordance, PolynomialPair) {
  const double t1 = poly_c1().trace();
  EXPECT_NEAR(concordance(poly_c12(0.5).trace(), t1, poly_c2(0.5).trace()), 0.944, 5e-4);
  EXPECT_NEAR(concordance(poly_c12(3.0).trace(), t1, poly_c2(3.0).trace()), 0.551, 5e-4);
  EXPECT_NEAR(concordance(poly_c12(-12.0).trace(), t1, poly_c2(-12.0).trace()),
              -0.10950071996960073, 1e-14);
}

TEST(Decompose, DiagonalOrderingByMagnitude) {
  Eigen::Matrix2d V;
  V << 2, 0, 0, -1;
  const auto d = decompose(V, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(d.eigvals(0), 2.0);
  EXPECT_DOUBLE_EQ(d.eigvals(1), -1.0);
  EXPECT_LT((d.eigvecs - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::Matrix2d U;
  U << -3, 0, 0, 1;
  EXPECT_DOUBLE_EQ(decompose(U, 2.0, 2.0).eigvals(0), -3.0);
}

TEST(Decompose, TiesKeepSignedDescendingOrder) {
  Eigen::Matrix2d V;
  V << -1, 0, 0, 1;
  const auto d = decompose(V, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(d.eigvals(0), 1.0);
  EXPECT_DOUBLE_EQ(d.eigvals(1), -1.0);
}

TEST(Decompose, PolynomialPairAtHalf) {
  const Eigen::Matrix2d c12 = poly_c12(0.5);
  const auto d = decompose(symmetrize(c12, Eigen::MatrixXd(c12.transpose())), poly_c1().trace(),
                           poly_c2(0.5).trace());
  EXPECT_NEAR(d.eigvals(0), 3.333460361130909, 1e-13);
  EXPECT_NEAR(d.eigvals(1), -0.08346036113090893, 1e-13);
  EXPECT_NEAR(d.eigvecs(0, 0), 0.8971373252879662, 1e-13);
  EXPECT_NEAR(d.eigvecs(1, 0), 0.4417517623905465, 1e-13);
  EXPECT_NEAR(d.eigvecs(0, 1), -0.4417517623905465, 1e-13);
  EXPECT_NEAR(d.eigvecs(1, 1), 0.8971373252879662, 1e-13);
  EXPECT_NEAR(d.contributions(0), 0.968358390747396, 1e-13);
  EXPECT_NEAR(d.contributions(1), -0.02424493836444021, 1e-13);
  EXPECT_NEAR(d.concordance, 0.9441134523829559, 1e-14);
}

TEST(Decompose, InvariantsOnRandomMatrices) {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const int p = 1 + static_cast<int>(rng.below(7));
    const Eigen::MatrixXd V = random_symmetric(rng, p);
    const double tk = p + rng.uniform(), tl = p + rng.uniform();
    const auto d = decompose(V, tk, tl);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
    EXPECT_LT((d.eigvecs.transpose() * d.eigvecs - I).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXd R = d.eigvecs * d.eigvals.asDiagonal() * d.eigvecs.transpose();
    EXPECT_LT((R - V).norm(), 1e-10 * std::max(1.0, V.norm()));
    EXPECT_NEAR(d.eigvals.sum(), V.trace(), 1e-10 * std::max(1.0, std::abs(V.trace())));
    EXPECT_NEAR(d.contributions.sum(), V.trace() / std::sqrt(tk * tl), 1e-12);
    for (int i = 0; i + 1 < p; ++i) {
      EXPECT_GE(std::abs(d.eigvals(i)), std::abs(d.eigvals(i + 1)));
    }
    for (int j = 0; j < p; ++j) {
      Eigen::Index at;
      d.eigvecs.col(j).cwiseAbs().maxCoeff(&at);
      EXPECT_GT(d.eigvecs(at, j), 0.0);
    }
  }
}

TEST(Decompose, LeadingDirectionMaximizesQuadraticForm) {
  Rng rng(41);
  Eigen::MatrixXd V = random_symmetric(rng, 4);
  V += 3.0 * Eigen::MatrixXd::Identity(4, 4);
  const auto d = decompose(V, 20.0, 20.0);
  const double best = d.eigvecs.col(0).dot(V * d.eigvecs.col(0));
  for (int t = 0; t < 10000; ++t) {
    Eigen::Vector4d w;
    for (int i = 0; i < 4; ++i) w(i) = rng.uniform() - 0.5;
    w.normalize();
    ASSERT_LE(w.dot(V * w), best + 1e-12);
  }
}

TEST(Decompose, SelfCaseContributionsAreProportions) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_surrogate(rng, unit_box(3), 8, 3);
    const auto C = cmat(m, m, InputPrior::uniform_box(3));
    const auto d = decompose(C.entries, C.trace, C.trace);
    EXPECT_NEAR(d.contributions.sum(), 1.0, 1e-12);
    EXPECT_GE(d.contributions.minCoeff(), -1e-12);
    EXPECT_NEAR(d.concordance, 1.0, 1e-12);
  }
}

TEST(Decompose, SignOfConcordanceFollowsEigenvalueSum) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd V = random_symmetric(rng, 3);
    const double s = V.trace();
    const double tk = 3.0 + rng.uniform(), tl = 3.0 + rng.uniform();
    if (std::abs(s) > std::sqrt(tk * tl)) continue;
    const auto d = decompose(V, tk, tl);
    EXPECT_EQ(std::signbit(d.concordance), std::signbit(d.eigvals.sum()));
  }
}

TEST(Decompose, ConstantFunctionRejected) {
  EXPECT_THROW(decompose(Eigen::MatrixXd::Zero(2, 2), 0.0, 1.0), ConstantFunctionError);
  EXPECT_THROW(decompose(Eigen::MatrixXd::Zero(2, 3), 1.0, 1.0), DimensionError);
}

TEST(ActivityScores, DiagonalExample) {
  Eigen::Matrix2d V;
  V << 2, 0, 0, -1;
  const auto s = activity_scores(decompose(V, 1.0, 1.0), 2);
  EXPECT_DOUBLE_EQ(s.signed_scores(0), 2.0);
  EXPECT_DOUBLE_EQ(s.signed_scores(1), -1.0);
  EXPECT_DOUBLE_EQ(s.unsigned_scores(0), 2.0);
  EXPECT_DOUBLE_EQ(s.unsigned_scores(1), 1.0);
  EXPECT_THROW(activity_scores(decompose(V, 1.0, 1.0), 0), std::invalid_argument);
  EXPECT_THROW(activity_scores(decompose(V, 1.0, 1.0), 3), std::invalid_argument);
}

TEST(ActivityScores, FirstOrderScoresDifferOnlyInSign) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto d = decompose(random_symmetric(rng, 4), 4.0, 4.0);
    const auto s = activity_scores(d, 1);
    EXPECT_LT((s.signed_scores.cwiseAbs() - s.unsigned_scores).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ActivityScores, PolynomialPairFirstOrder) {
  const Eigen::Matrix2d c12 = poly_c12(3.0);
  const auto d = decompose(symmetrize(c12, Eigen::MatrixXd(c12.transpose())), poly_c1().trace(),
                           poly_c2(3.0).trace());
  const auto s = activity_scores(d, 1);
  EXPECT_NEAR(s.signed_scores(0), 3.2478258585782886, 1e-12);
  EXPECT_NEAR(s.signed_scores(1), 2.5682663848849785, 1e-12);
  const Eigen::VectorXd direct = d.eigvals(0) * d.eigvecs.col(0).array().square().matrix();
  EXPECT_LT((s.signed_scores - direct).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ActivityScores, SelfCaseIsClassicalActivity) {
  Rng rng(8);
  const auto m = random_surrogate(rng, unit_box(3), 8, 2);
  const auto C = cmat(m, m, InputPrior::uniform_box(3));
  const auto d = decompose(C.entries, C.trace, C.trace);
  const auto s = activity_scores(d, 3);
  EXPECT_LT((s.signed_scores - C.entries.diagonal()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SharedMatrix, Sums) {
  const auto c1 = CoActiveMatrix::from_entries(poly_c1(), "f1", "f1");
  const auto c2 = CoActiveMatrix::from_entries(poly_c2(1.0), "f2", "f2");
  EXPECT_EQ(shared_matrix({c1}), c1.entries);
  EXPECT_EQ(shared_matrix({c1, c1}), 2.0 * c1.entries);
  EXPECT_NEAR(shared_matrix({c1, c2})(0, 0), 960.0 / 180.0, 1e-14);
  const auto cross = CoActiveMatrix::from_entries(poly_c12(1.0), "f1", "f2");
  EXPECT_THROW(shared_matrix({c1, cross}), std::invalid_argument);
  EXPECT_THROW(shared_matrix({}), std::invalid_argument);
}

TEST(PoincareBound, FullBasisAndOrthogonalDirection) {
  Eigen::Matrix2d C;
  C << 1, 0, 0, 0;  // f(x) = x1
  const Eigen::Matrix2d S = Eigen::Matrix2d::Identity() / 12.0;
  EXPECT_NEAR(poincare_bound(C, S, Eigen::Matrix2d::Identity()), 0.0, 1e-16);
  EXPECT_NEAR(poincare_bound(C, S, Eigen::Vector2d(0, 1)), S(0, 0) * C(0, 0), 1e-16);
  EXPECT_NEAR(poincare_bound(C, S, Eigen::Vector2d(3, 0)), 0.0, 1e-16);
  EXPECT_THROW(poincare_bound(C, S, Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST(PoincareBound, ActiveSubspaceIsMinimalAndBoundIsMonotone) {
  Rng rng(9);
  const auto m = random_surrogate(rng, unit_box(4), 12, 3);
  const auto prior = InputPrior({Marginal(Normal{0.5, 0.2}), Marginal(Uniform{0, 2}),
                                 Marginal(Uniform{0, 1}), Marginal(Normal{0.5, 0.4, 0, 1})});
  const Eigen::MatrixXd C = canonical_transform(cmat(m, m, prior).entries, prior.covariance());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  double previous = poincare_bound(C, I, Eigen::MatrixXd(4, 0));
  for (int r = 1; r <= 4; ++r) {
    const Eigen::MatrixXd W = es.eigenvectors().rightCols(r);
    const double best = poincare_bound(C, I, W);
    EXPECT_GE(best, -1e-10);
    EXPECT_LE(best, previous + 1e-12);
    previous = best;
    for (int t = 0; t < 100; ++t) {
      Eigen::MatrixXd B(4, r);
      for (int i = 0; i < B.size(); ++i) B.data()[i] = rng.uniform() - 0.5;
      EXPECT_LE(best, poincare_bound(C, I, B) + 1e-12 * C.trace());
    }
  }
  EXPECT_NEAR(previous, 0.0, 1e-12);
}

TEST(SelectDim, Examples) {
  const auto a = select_dim(Eigen::Vector3d(2, -1, 0.001), 0.01);
  EXPECT_EQ(a.r, 2);
  EXPECT_FALSE(a.warning);
  EXPECT_EQ(a.gap_index, 2);
  EXPECT_NEAR(a.max_gap_ratio, 1000.0, 1e-9);
  const auto b = select_dim(Eigen::Vector3d(0.001, -0.0005, 0.0), 0.01);
  EXPECT_EQ(b.r, 0);
  EXPECT_TRUE(b.warning);
  EXPECT_THROW(select_dim(Eigen::Vector3d(1, 0, 0), 0.0), std::invalid_argument);
  const Eigen::Matrix2d c12 = poly_c12(0.5);
  const auto d = decompose(symmetrize(c12, Eigen::MatrixXd(c12.transpose())), poly_c1().trace(),
                           poly_c2(0.5).trace());
  EXPECT_EQ(select_dim(d.eigvals, 0.1 * std::abs(d.eigvals(0))).r, 1);
}

}  // namespace
}  // namespace coas
