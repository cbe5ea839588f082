#pragma once

#include <string>

#include <Eigen/Dense>

#include "coas/model.hpp"
#include "coas/prior.hpp"

namespace coas {

enum class MatrixKind { plain, modified };

/// Expected gradient outer product E[grad f_k grad f_l^T] for a model pair.
struct CoActiveMatrix {
  Eigen::MatrixXd entries;
  double trace = 0.0;
  std::string label_k;
  std::string label_l;
  MatrixKind kind = MatrixKind::plain;

  int p() const { return static_cast<int>(entries.rows()); }
  bool is_self() const { return label_k == label_l; }

  static CoActiveMatrix from_entries(Eigen::MatrixXd entries,
                                     std::string label_k, std::string label_l,
                                     MatrixKind kind = MatrixKind::plain);
};

/// Support (a, b) of the product of two hinge indicator regions on one
/// input; nullptr means the term does not involve that input. Empty
/// supports come back with a == b.
struct Bounds {
  double a;
  double b;
};
Bounds integration_bounds(const HingeFactor* fk, const HingeFactor* fl);

/// Univariate integrals against mu_i for factors of two terms on the same
/// input:
///   I1 = int h_k'(x) h_l(x) mu_i,  I2 = int h_k h_l mu_i,
///   I3 = int h_k' h_l' mu_i.
/// An absent factor is the constant 1. I1 is not symmetric in (k, l).
double integral_i1(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu);
double integral_i2(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu);
double integral_i3(const HingeFactor* fk, const HingeFactor* fl,
                   const Marginal& mu);

/// Single-term integrals for the expected gradient: I4 = int h' mu_i,
/// I5 = int h mu_i (1 for an absent factor).
double integral_i4(const HingeFactor* f, const Marginal& mu);
double integral_i5(const HingeFactor* f, const Marginal& mu);

/// Closed-form C_kl. Cost is O(p M_k M_l) univariate integrals.
CoActiveMatrix cmat(const MarsSurrogate& mk, const MarsSurrogate& ml,
                    const InputPrior& prior);

/// t_kl = trace(C_kl) without forming off-diagonal entries.
double cotrace(const MarsSurrogate& mk, const MarsSurrogate& ml,
               const InputPrior& prior);

/// Z = E[grad f].
Eigen::VectorXd expected_gradient(const MarsSurrogate& m,
                                  const InputPrior& prior);

/// C_kl + Z_k Z_l^T.
CoActiveMatrix cmat_modified(const MarsSurrogate& mk, const MarsSurrogate& ml,
                             const InputPrior& prior);

}  // namespace coas
