#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "coas/closedform.hpp"

namespace coas {

/// V = (C_kl + C_lk) / 2, forced exactly symmetric. Without C_lk the
/// transpose of C_kl is used.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& ckl,
                           const std::optional<Eigen::MatrixXd>& clk = std::nullopt);

/// kappa = t_kl / sqrt(t_k t_l), in [-1, 1]. Throws ConstantFunctionError
/// when t_k or t_l <= tol.
double concordance(double tkl, double tk, double tl, double tol = 1e-12);

/// sqrt((1 - kappa) / 2).
double discordance(double kappa);

/// Eigendecomposition of a symmetrized co-active matrix.
///
/// Eigenpairs are stored by descending |lambda|; equal magnitudes keep the
/// larger signed value first. Each eigenvector is signed so that its
/// largest-magnitude component is positive (first such index on ties).
/// contributions(i) = lambda_i / sqrt(t_k t_l) and they sum to concordance.
struct CoActiveDecomposition {
  Eigen::MatrixXd V;
  Eigen::VectorXd eigvals;
  Eigen::MatrixXd eigvecs;
  Eigen::VectorXd contributions;
  double concordance = 0.0;
  double t_k = 0.0;
  double t_l = 0.0;

  int p() const { return static_cast<int>(eigvals.size()); }
};

CoActiveDecomposition decompose(const Eigen::MatrixXd& V, double tk, double tl,
                                double tol = 1e-12);

/// Signed scores sum_{j<=q} lambda_j w_{i,j}^2 and unsigned scores using
/// |lambda_j|, over the |lambda|-ordered eigenpairs.
struct ActivityScores {
  Eigen::VectorXd signed_scores;
  Eigen::VectorXd unsigned_scores;
  int q = 0;
};

ActivityScores activity_scores(const CoActiveDecomposition& dec, int q);

/// H = sum_k C_k over single-model matrices.
Eigen::MatrixXd shared_matrix(const std::vector<CoActiveMatrix>& selves);

/// trace(Sigma (I - P_B) C (I - P_B)) with P_B the orthogonal projector onto
/// span(B). Throws std::invalid_argument if B is column-rank deficient.
double poincare_bound(const Eigen::MatrixXd& c_self, const Eigen::MatrixXd& sigma,
                      const Eigen::MatrixXd& basis);

/// Sigma^{1/2} C Sigma^{1/2}: the gradient matrix in coordinates whitened by
/// the prior covariance.
Eigen::MatrixXd canonical_transform(const Eigen::MatrixXd& c,
                                    const Eigen::MatrixXd& sigma);

struct DimSelection {
  int r = 0;
  /// Largest |lambda_j| / |lambda_{j+1}| over consecutive pairs, and the j
  /// (1-based count of leading eigenvalues) where it occurs.
  double max_gap_ratio = 0.0;
  int gap_index = 0;
  bool warning = false;
};

/// r = #{ |lambda_i| >= tau }. `eigvals` must already be |lambda|-ordered.
DimSelection select_dim(const Eigen::VectorXd& eigvals, double tau);

}  // namespace coas
