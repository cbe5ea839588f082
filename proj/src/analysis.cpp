#include "coas/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "coas/error.hpp"

namespace coas {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& ckl,
                           const std::optional<Eigen::MatrixXd>& clk) {
  if (ckl.rows() != ckl.cols()) throw DimensionError("symmetrize: matrix not square");
  Eigen::MatrixXd v;
  if (clk) {
    if (clk->rows() != ckl.rows() || clk->cols() != ckl.cols()) {
      throw DimensionError("symmetrize: C_kl and C_lk differ in size");
    }
    v = 0.5 * (ckl + *clk);
  } else {
    v = 0.5 * (ckl + ckl.transpose());
  }
  return 0.5 * (v + v.transpose());
}

double concordance(double tkl, double tk, double tl, double tol) {
  if (!(tk > tol) || !(tl > tol)) {
    std::ostringstream os;
    os << "concordance undefined for a constant function (t_k=" << tk
       << ", t_l=" << tl << ")";
    throw ConstantFunctionError(os.str());
  }
  const double kappa = tkl / std::sqrt(tk * tl);
  if (std::abs(kappa) > 1.0 + 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "concordance " << kappa << " outside [-1, 1]";
    throw std::domain_error(os.str());
  }
  return std::clamp(kappa, -1.0, 1.0);
}

double discordance(double kappa) {
  return std::sqrt(std::max(0.0, (1.0 - kappa) / 2.0));
}

CoActiveDecomposition decompose(const Eigen::MatrixXd& V, double tk, double tl,
                                double tol) {
  if (V.rows() != V.cols()) throw DimensionError("decompose: matrix not square");
  CoActiveDecomposition out;
  out.V = 0.5 * (V + V.transpose());
  out.t_k = tk;
  out.t_l = tl;
  out.concordance = concordance(out.V.trace(), tk, tl, tol);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.V);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("decompose: eigensolver did not converge");
  }
  const Eigen::VectorXd& lam = es.eigenvalues();
  const int p = static_cast<int>(lam.size());
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(lam(a)), mb = std::abs(lam(b));
    if (ma != mb) return ma > mb;
    return lam(a) > lam(b);
  });
  out.eigvals.resize(p);
  out.eigvecs.resize(p, p);
  for (int j = 0; j < p; ++j) {
    out.eigvals(j) = lam(order[j]);
    Eigen::VectorXd w = es.eigenvectors().col(order[j]);
    Eigen::Index big = 0;
    for (Eigen::Index i = 1; i < w.size(); ++i) {
      if (std::abs(w(i)) > std::abs(w(big))) big = i;
    }
    if (w(big) < 0.0) w = -w;
    out.eigvecs.col(j) = w;
  }
  out.contributions = out.eigvals / std::sqrt(tk * tl);
  return out;
}

ActivityScores activity_scores(const CoActiveDecomposition& dec, int q) {
  const int p = dec.p();
  if (q < 1 || q > p) throw std::invalid_argument("activity_scores: q must be in [1, p]");
  ActivityScores out{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p), q};
  for (int j = 0; j < q; ++j) {
    const Eigen::VectorXd w2 = dec.eigvecs.col(j).array().square();
    out.signed_scores += dec.eigvals(j) * w2;
    out.unsigned_scores += std::abs(dec.eigvals(j)) * w2;
  }
  return out;
}

Eigen::MatrixXd shared_matrix(const std::vector<CoActiveMatrix>& selves) {
  if (selves.empty()) throw std::invalid_argument("shared_matrix: no matrices");
  const int p = selves.front().p();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (const auto& c : selves) {
    if (c.p() != p) throw DimensionError("shared_matrix: size mismatch");
    if (!c.is_self()) {
      throw std::invalid_argument("shared_matrix: expects single-model matrices, got " +
                                  c.label_k + " vs " + c.label_l);
    }
    h += c.entries;
  }
  return h;
}

double poincare_bound(const Eigen::MatrixXd& c_self, const Eigen::MatrixXd& sigma,
                      const Eigen::MatrixXd& basis) {
  const auto p = c_self.rows();
  if (c_self.cols() != p || sigma.rows() != p || sigma.cols() != p ||
      basis.rows() != p) {
    throw DimensionError("poincare_bound: size mismatch");
  }
  Eigen::MatrixXd resid = Eigen::MatrixXd::Identity(p, p);
  if (basis.cols() > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    qr.setThreshold(1e-12);
    if (qr.rank() < basis.cols()) {
      throw std::invalid_argument("poincare_bound: basis is rank deficient");
    }
    const Eigen::MatrixXd Q =
        qr.householderQ() * Eigen::MatrixXd::Identity(p, basis.cols());
    resid -= Q * Q.transpose();
  }
  return (sigma * resid * c_self * resid).trace();
}

Eigen::MatrixXd canonical_transform(const Eigen::MatrixXd& c,
                                    const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::MatrixXd half = es.operatorSqrt();
  return half * c * half;
}

DimSelection select_dim(const Eigen::VectorXd& eigvals, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("select_dim: tau must be > 0");
  DimSelection out;
  for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
    if (std::abs(eigvals(i)) >= tau) ++out.r;
  }
  for (Eigen::Index j = 0; j + 1 < eigvals.size(); ++j) {
    const double num = std::abs(eigvals(j)), den = std::abs(eigvals(j + 1));
    const double ratio = den > 0.0 ? num / den
                                   : (num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    if (ratio > out.max_gap_ratio) {
      out.max_gap_ratio = ratio;
      out.gap_index = static_cast<int>(j + 1);
    }
  }
  out.warning = out.r == 0;
  return out;
}

}  // namespace coas
