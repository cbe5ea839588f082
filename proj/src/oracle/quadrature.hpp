#pragma once

// Adaptive Gauss-Kronrod quadrature used as an independent check on the
// closed-form integrals. Nothing here calls into closedform.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "coas/model.hpp"
#include "coas/prior.hpp"

namespace coas::oracle {

using VectorIntegrand = std::function<Eigen::VectorXd(double)>;

struct QuadratureOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-15;
  int max_intervals = 4000;
};

/// Integral of a vector-valued f over [a, b] (infinite ends allowed),
/// splitting first at `breaks` (points where f may be discontinuous) and then
/// bisecting the interval with the largest G7/K15 error estimate.
Eigen::VectorXd integrate(const VectorIntegrand& f, double a, double b,
                          std::vector<double> breaks, int dim,
                          const QuadratureOptions& opt = {});

double integrate_scalar(const std::function<double(double)>& f, double a,
                        double b, std::vector<double> breaks = {},
                        const QuadratureOptions& opt = {});

/// int_a^b x^r mu(x) dx from the density alone.
double moment_by_quadrature(const Marginal& mu, int r, double a, double b);

/// E[grad f_k grad f_l^T] by nested adaptive quadrature over the product
/// prior, breaking each axis at both models' knots. Intended for p <= 3.
Eigen::MatrixXd cmat_by_quadrature(const MarsSurrogate& mk,
                                   const MarsSurrogate& ml,
                                   const InputPrior& prior,
                                   const QuadratureOptions& opt = {});

}  // namespace coas::oracle
