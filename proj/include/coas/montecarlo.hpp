#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coas/closedform.hpp"
#include "coas/model.hpp"
#include "coas/prior.hpp"

namespace coas {

/// n x p Latin hypercube on `domain`: each column has exactly one point per
/// 1/n stratum. Starting from a random design, `iterations` within-column
/// swaps are proposed and kept when they lower the Morris-Mitchell phi_q
/// criterion (a smooth surrogate for maximin distance). Negative
/// `iterations` picks min(10 n, 20000).
Eigen::MatrixXd lhs_design(int n, int p, const Domain& domain,
                           std::uint64_t seed, int iterations = -1);

struct FdGradient {
  Eigen::VectorXd grad;
  /// Coordinates where the box forced a one-sided difference.
  std::vector<int> one_sided;
};

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. When `domain`
/// is non-empty and x_i is within h of a bound, the one-sided difference
/// pointing into the box is used instead.
FdGradient fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                       const Domain& domain = {});

enum class GradientMode { analytic, finite_difference };

/// A function the Monte Carlo estimator can differentiate: surrogates use
/// their analytic gradient, raw callables central differences with
/// h_i = rel_step * (hi_i - lo_i).
class SampledFunction {
 public:
  static SampledFunction from_surrogate(MarsSurrogate m);
  static SampledFunction from_callable(
      std::function<double(const Eigen::VectorXd&)> f, Domain domain,
      std::string label, double rel_step = 1e-5);
  /// Callable with a known gradient (used for exact fixtures).
  static SampledFunction from_callable_with_gradient(
      std::function<double(const Eigen::VectorXd&)> f,
      std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad,
      Domain domain, std::string label);

  int p() const { return static_cast<int>(domain_.size()); }
  const Domain& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  GradientMode mode() const { return mode_; }
  /// Relative step; 0 for analytic gradients.
  double rel_step() const { return mode_ == GradientMode::analytic ? 0.0 : rel_step_; }

  double value(const Eigen::VectorXd& x) const { return f_(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

 private:
  SampledFunction() = default;

  std::function<double(const Eigen::VectorXd&)> f_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_;
  Domain domain_;
  std::string label_;
  GradientMode mode_ = GradientMode::analytic;
  double rel_step_ = 0.0;
};

struct McEstimate {
  CoActiveMatrix estimate;
  /// Entrywise standard error of the mean.
  Eigen::MatrixXd se;
  long long samples = 0;
  std::uint64_t seed = 0;
  double h = 0.0;
};

/// (1/B) sum_b grad f_k(x_b) grad f_l(x_b)^T with x_b drawn i.i.d. from the
/// prior. Draws are split into fixed-size shards, shard s seeded from
/// (seed, s), so the result does not depend on `threads`.
McEstimate mc_cmat(const SampledFunction& fk, const SampledFunction& fl,
                   const InputPrior& prior, long long B, std::uint64_t seed,
                   int threads = 1);

}  // namespace coas
