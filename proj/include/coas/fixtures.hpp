#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "coas/model.hpp"

namespace coas::fixtures {

using Function = std::function<double(const Eigen::VectorXd&)>;

/// f(x) = x1^2 + x1 x2 + beta x2^3 on [0,1]^2; beta = 0 is the base model.
double poly(const Eigen::VectorXd& x, double beta);
Eigen::VectorXd poly_gradient(const Eigen::VectorXd& x, double beta);

/// Piston cycle time with inputs (M, S, V0, k, T0) given on [0,1]^5 and
/// mapped affinely onto their physical ranges; p0 and ta are the ambient
/// pressure and temperature.
double piston(const Eigen::VectorXd& unit_x, double p0, double ta);
/// Physical ranges of (M, S, V0, k, T0).
const Domain& piston_ranges();

/// A named scalar function over a box, as resolved from a `builtin:` URI.
struct Fixture {
  std::string name;
  Domain domain;
  Function f;
  /// Exact gradient when the fixture has one in closed form.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// Resolves `builtin:poly?beta=3`, `builtin:piston?p0=90000&ta=284`,
/// `builtin:linear?a=1,2,3`. Throws std::invalid_argument for anything else.
Fixture resolve(const std::string& uri);

bool is_builtin(const std::string& uri);

}  // namespace coas::fixtures
