#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coas {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Interval&) const = default;
};

using Domain = std::vector<Interval>;

/// One hinge [sign * (x[var] - knot)]_+ inside a basis product.
struct HingeFactor {
  int var = 0;
  int sign = 1;
  double knot = 0.0;

  double value(double x) const {
    const double h = sign * (x - knot);
    return h > 0.0 ? h : 0.0;
  }
  /// Right derivative: +1 on [knot, inf) for sign +1, -1 on (-inf, knot)
  /// for sign -1, zero elsewhere.
  double slope(double x) const {
    return sign > 0 ? (x >= knot ? 1.0 : 0.0) : (x < knot ? -1.0 : 0.0);
  }
  bool operator==(const HingeFactor&) const = default;
};

struct BasisTerm {
  double coef = 0.0;
  std::vector<HingeFactor> factors;

  int degree() const { return static_cast<int>(factors.size()); }
  /// Factor on input `var`, or nullptr when the term does not involve it.
  const HingeFactor* factor_for(int var) const;
  bool operator==(const BasisTerm&) const = default;
};

/// intercept + sum_m coef_m * prod_{factors} [sign (x_var - knot)]_+
///
/// Constructed once and never mutated. Each term has at least one factor
/// and at most one factor per input; every knot lies in the domain.
class MarsSurrogate {
 public:
  MarsSurrogate(Domain domain, double intercept, std::vector<BasisTerm> terms,
                std::string label = {});

  static MarsSurrogate constant(Domain domain, double value,
                                std::string label = {});

  int p() const { return static_cast<int>(domain_.size()); }
  const Domain& domain() const { return domain_; }
  double intercept() const { return intercept_; }
  const std::vector<BasisTerm>& terms() const { return terms_; }
  const std::string& label() const { return label_; }
  int max_degree() const;

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd evaluate_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  /// Analytic gradient with the right-derivative convention at knots.
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  MarsSurrogate relabeled(std::string label) const;

  bool operator==(const MarsSurrogate&) const = default;

 private:
  Domain domain_;
  double intercept_;
  std::vector<BasisTerm> terms_;
  std::string label_;
};

/// Members standing in for posterior draws of one model; all share p and
/// domain.
class Ensemble {
 public:
  Ensemble(std::string label, std::vector<MarsSurrogate> members);

  const std::string& label() const { return label_; }
  const std::vector<MarsSurrogate>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  int p() const { return members_.front().p(); }
  const Domain& domain() const { return members_.front().domain(); }

 private:
  std::string label_;
  std::vector<MarsSurrogate> members_;
};

struct FitConfig {
  int max_terms = 50;
  int max_degree = 3;
  int min_samples = 5;
  /// GCV cost per knot; Friedman recommends 2-4.
  double penalty = 3.0;
  /// Observations kept beyond the extreme knots / between knots; negative
  /// selects Friedman's defaults (alpha = 0.05).
  int endspan = -1;
  int minspan = -1;
  /// Forward pass stops once a step explains less than this fraction of the
  /// total sum of squares.
  double forward_tolerance = 1e-10;
};

struct FitResult {
  MarsSurrogate model;
  double r2 = 0.0;
  double rmse = 0.0;
  double gcv = 0.0;
  int forward_terms = 0;
  /// Response had zero variance; a constant model was returned.
  bool constant_response = false;
};

/// Forward stepwise hinge selection with GCV backward pruning.
/// Deterministic in (X, y, cfg).
FitResult fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y, const Domain& domain,
              const FitConfig& cfg = {}, std::string label = {});

/// B fits; member 0 on all rows, members 1..B-1 on bootstrap resamples drawn
/// from `seed`.
Ensemble fit_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Domain& domain, const FitConfig& cfg, int B,
                      std::uint64_t seed, std::string label = {},
                      int threads = 1);

/// k-fold cross-validated root mean square prediction error, on the scale
/// of y divided by its standard deviation. Folds are contiguous after a
/// seeded shuffle.
double cv_rmspe(const Eigen::Ref<const Eigen::MatrixXd>& X,
                const Eigen::Ref<const Eigen::VectorXd>& y, const Domain& domain,
                const FitConfig& cfg, int folds, std::uint64_t seed);

}  // namespace coas
