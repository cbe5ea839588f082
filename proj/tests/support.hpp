#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coas/model.hpp"
#include "coas/prior.hpp"
#include "coas/random.hpp"

namespace coas::testing {

inline Domain unit_box(int p) { return Domain(p, Interval{0.0, 1.0}); }

// Random hinge surrogate with knots inside `domain` and terms of degree up to
// `max_degree`, each input used at most once per term.
inline MarsSurrogate random_surrogate(Rng& rng, const Domain& domain, int terms,
                                      int max_degree, const std::string& label = {}) {
  const int p = static_cast<int>(domain.size());
  std::vector<BasisTerm> out;
  for (int t = 0; t < terms; ++t) {
    BasisTerm term;
    term.coef = 4.0 * rng.uniform() - 2.0;
    const int degree = 1 + static_cast<int>(rng.below(std::min(max_degree, p)));
    std::vector<int> vars(p);
    for (int i = 0; i < p; ++i) vars[i] = i;
    for (int d = 0; d < degree; ++d) {
      const int pick = d + static_cast<int>(rng.below(p - d));
      std::swap(vars[d], vars[pick]);
      const auto& iv = domain[vars[d]];
      term.factors.push_back({vars[d], rng.uniform() < 0.5 ? 1 : -1,
                              iv.lo + (iv.hi - iv.lo) * rng.uniform()});
    }
    out.push_back(std::move(term));
  }
  return MarsSurrogate(domain, 2.0 * rng.uniform() - 1.0, std::move(out), label);
}

inline Eigen::VectorXd sample_response(const Eigen::MatrixXd& X,
                                       double (*f)(const Eigen::VectorXd&)) {
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = f(X.row(i).transpose());
  return y;
}

}  // namespace coas::testing
