#include "coas/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace coas {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double z) {
  return std::isinf(z) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double z_phi(double z) { return std::isinf(z) ? 0.0 : z * phi(z); }

// Standard normal mass on [alpha, beta], accurate in both tails.
double normal_mass(double alpha, double beta) {
  if (alpha >= beta) return 0.0;
  if (alpha >= 0.0) {
    return 0.5 * (std::erfc(alpha * kInvSqrt2) - std::erfc(beta * kInvSqrt2));
  }
  if (beta <= 0.0) {
    return 0.5 * (std::erfc(-beta * kInvSqrt2) - std::erfc(-alpha * kInvSqrt2));
  }
  return 1.0 - 0.5 * std::erfc(beta * kInvSqrt2) -
         0.5 * std::erfc(-alpha * kInvSqrt2);
}

double uniform_moment(const Uniform& u, int r, double a, double b) {
  a = std::max(a, u.lo);
  b = std::min(b, u.hi);
  if (!(a < b)) return 0.0;
  const double w = b - a;
  const double width = u.hi - u.lo;
  switch (r) {
    case 0:
      return w / width;
    case 1:
      return w * (a + b) / (2.0 * width);
    case 2:
      return w * (a * a + a * b + b * b) / (3.0 * width);
  }
  throw std::invalid_argument("truncated_moment: order must be 0, 1 or 2");
}

double normal_moment(const Normal& n, int r, double a, double b) {
  a = std::max(a, n.lo);
  b = std::min(b, n.hi);
  if (!(a < b)) return 0.0;
  const double m = n.mean;
  const double s = n.sd;
  const double norm = normal_mass((n.lo - m) / s, (n.hi - m) / s);
  const double alpha = (a - m) / s;
  const double beta = (b - m) / s;
  const double mass = normal_mass(alpha, beta);
  const double dphi = phi(alpha) - phi(beta);
  switch (r) {
    case 0:
      return mass / norm;
    case 1:
      return (m * mass + s * dphi) / norm;
    case 2:
      return ((m * m + s * s) * mass + 2.0 * m * s * dphi +
              s * s * (z_phi(alpha) - z_phi(beta))) /
             norm;
  }
  throw std::invalid_argument("truncated_moment: order must be 0, 1 or 2");
}

}  // namespace

Marginal::Marginal(Uniform u) : dist_(u) {
  if (!(u.lo < u.hi) || !std::isfinite(u.lo) || !std::isfinite(u.hi)) {
    throw std::invalid_argument("uniform marginal requires finite lo < hi");
  }
}

Marginal::Marginal(Normal n) : dist_(n) {
  if (!(n.sd > 0.0) || !std::isfinite(n.mean)) {
    throw std::invalid_argument("normal marginal requires sd > 0");
  }
  if (!(n.lo < n.hi)) {
    throw std::invalid_argument("normal marginal requires trunc_lo < trunc_hi");
  }
  if (normal_mass((n.lo - n.mean) / n.sd, (n.hi - n.mean) / n.sd) <= 0.0) {
    throw std::invalid_argument("normal truncation interval has zero mass");
  }
}

std::pair<double, double> Marginal::support() const {
  return std::visit([](const auto& d) { return std::pair{d.lo, d.hi}; }, dist_);
}

double Marginal::pdf(double x) const {
  if (const auto* u = std::get_if<Uniform>(&dist_)) {
    return (x >= u->lo && x <= u->hi) ? 1.0 / (u->hi - u->lo) : 0.0;
  }
  const auto& n = std::get<Normal>(dist_);
  if (x < n.lo || x > n.hi) return 0.0;
  const double norm = normal_mass((n.lo - n.mean) / n.sd, (n.hi - n.mean) / n.sd);
  return phi((x - n.mean) / n.sd) / (n.sd * norm);
}

double Marginal::mean() const {
  return truncated_moment(*this, 1, -kInf, kInf);
}

double Marginal::variance() const {
  if (const auto* u = std::get_if<Uniform>(&dist_)) {
    const double w = u->hi - u->lo;
    return w * w / 12.0;
  }
  // Second moment about the mean, taken on the centered law.
  return truncated_moment(shifted(mean()), 2, -kInf, kInf);
}

Marginal Marginal::shifted(double c) const {
  if (const auto* u = std::get_if<Uniform>(&dist_)) {
    return Uniform{u->lo - c, u->hi - c};
  }
  auto n = std::get<Normal>(dist_);
  n.mean -= c;
  n.lo -= c;
  n.hi -= c;
  return n;
}

double Marginal::quantile(double u) const {
  if (const auto* d = std::get_if<Uniform>(&dist_)) {
    return d->lo + u * (d->hi - d->lo);
  }
  const auto& n = std::get<Normal>(dist_);
  const double alpha = (n.lo - n.mean) / n.sd;
  const double beta = (n.hi - n.mean) / n.sd;
  double z;
  if (alpha > 0.0) {
    // Upper tail: interpolate survival probabilities.
    const double qa = 0.5 * std::erfc(alpha * kInvSqrt2);
    const double qb = 0.5 * std::erfc(beta * kInvSqrt2);
    const double q = qa - u * (qa - qb);
    z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
  } else {
    const double fa = 0.5 * std::erfc(-alpha * kInvSqrt2);
    const double fb = 0.5 * std::erfc(-beta * kInvSqrt2);
    const double f = fa + u * (fb - fa);
    z = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * f);
  }
  return std::clamp(n.mean + n.sd * z, n.lo, n.hi);
}

double truncated_moment(const Marginal& mu, int r, double a, double b) {
  if (r < 0 || r > 2) {
    throw std::invalid_argument("truncated_moment: order must be 0, 1 or 2");
  }
  if (!(a < b)) return 0.0;
  return std::visit(
      [&](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, Uniform>) {
          return uniform_moment(d, r, a, b);
        } else {
          return normal_moment(d, r, a, b);
        }
      },
      mu.distribution());
}

InputPrior::InputPrior(std::vector<Marginal> dims) : dims_(std::move(dims)) {}

InputPrior InputPrior::uniform_box(int p, double lo, double hi) {
  return InputPrior(std::vector<Marginal>(p, Marginal(Uniform{lo, hi})));
}

Eigen::MatrixXd InputPrior::covariance() const {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p(), p());
  for (int i = 0; i < p(); ++i) sigma(i, i) = dims_[i].variance();
  return sigma;
}

Eigen::VectorXd InputPrior::sample(Rng& rng) const {
  Eigen::VectorXd x(p());
  for (int i = 0; i < p(); ++i) x(i) = dims_[i].quantile(rng.uniform());
  return x;
}

}  // namespace coas
