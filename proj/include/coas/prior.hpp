#pragma once

#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "coas/random.hpp"

namespace coas {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// Normal(mean, sd), optionally truncated to [lo, hi] and renormalized.
struct Normal {
  double mean = 0.0;
  double sd = 1.0;
  double lo = -kInf;
  double hi = kInf;
};

/// One independent factor mu_i of a product prior.
class Marginal {
 public:
  Marginal(Uniform u);
  Marginal(Normal n);

  bool is_uniform() const { return std::holds_alternative<Uniform>(dist_); }
  const std::variant<Uniform, Normal>& distribution() const { return dist_; }

  /// Closed support [lo, hi]; infinite ends for untruncated normals.
  std::pair<double, double> support() const;
  double pdf(double x) const;
  double mean() const;
  double variance() const;

  /// Law of x - c. Integrals of (x - c)^r are taken on the shifted marginal
  /// to avoid cancellation far from the origin.
  Marginal shifted(double c) const;

  /// Inverse-CDF draw from a uniform u in (0, 1).
  double quantile(double u) const;

 private:
  std::variant<Uniform, Normal> dist_;
};

/// xi(r | a, b) = integral over [a, b] of x^r mu_i(x) dx for r in {0, 1, 2}.
/// Infinite ends are allowed; a >= b or an interval outside the support
/// yields 0.
double truncated_moment(const Marginal& mu, int r, double a, double b);

/// Independent product prior over p inputs.
class InputPrior {
 public:
  InputPrior() = default;
  explicit InputPrior(std::vector<Marginal> dims);

  static InputPrior uniform_box(int p, double lo = 0.0, double hi = 1.0);

  int p() const { return static_cast<int>(dims_.size()); }
  const Marginal& operator[](int i) const { return dims_[i]; }
  const std::vector<Marginal>& dims() const { return dims_; }

  /// Diagonal covariance of the prior.
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  std::vector<Marginal> dims_;
};

}  // namespace coas
