#include "coas/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "coas/error.hpp"
#include "coas/random.hpp"

namespace coas {
namespace {

constexpr long long kShard = 4096;
constexpr double kPhiPower = 5.0;  // applied to squared distances: d^-10

double phi_term(double d2) { return std::pow(std::max(d2, 1e-300), -kPhiPower); }

}  // namespace

Eigen::MatrixXd lhs_design(int n, int p, const Domain& domain,
                           std::uint64_t seed, int iterations) {
  if (n < 2) throw std::invalid_argument("lhs_design: n must be >= 2");
  if (p < 1 || static_cast<int>(domain.size()) != p) {
    throw DimensionError("lhs_design: domain length must equal p");
  }
  Rng rng(seed);
  Eigen::MatrixXd U(n, p);
  std::vector<int> perm(n);
  for (int c = 0; c < p; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    for (int i = 0; i < n; ++i) U(i, c) = (perm[i] + rng.uniform()) / n;
  }

  if (iterations < 0) iterations = std::min(10 * n, 20000);
  auto dist2 = [&](int a, int b) { return (U.row(a) - U.row(b)).squaredNorm(); };
  for (int it = 0; it < iterations; ++it) {
    const int c = static_cast<int>(rng.below(p));
    const int a = static_cast<int>(rng.below(n));
    int b = static_cast<int>(rng.below(n - 1));
    if (b >= a) ++b;
    const double xa = U(a, c), xb = U(b, c);
    double delta = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == a || j == b) continue;
      const double da = dist2(a, j), db = dist2(b, j);
      const double xj = U(j, c);
      const double sa = (xa - xj) * (xa - xj), sb = (xb - xj) * (xb - xj);
      delta += phi_term(da - sa + sb) - phi_term(da) + phi_term(db - sb + sa) -
               phi_term(db);
    }
    if (delta < 0.0) std::swap(U(a, c), U(b, c));
  }

  Eigen::MatrixXd X(n, p);
  for (int c = 0; c < p; ++c) {
    const double lo = domain[c].lo, w = domain[c].hi - domain[c].lo;
    X.col(c) = (lo + w * U.col(c).array()).matrix();
  }
  return X;
}

FdGradient fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                       const Domain& domain) {
  const auto p = x.size();
  if (h.size() != p || (!domain.empty() && static_cast<Eigen::Index>(domain.size()) != p)) {
    throw DimensionError("fd_gradient: step or domain length differs from x");
  }
  FdGradient out{Eigen::VectorXd(p), {}};
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < p; ++i) {
    const bool low = !domain.empty() && x(i) - h(i) < domain[i].lo;
    const bool high = !domain.empty() && x(i) + h(i) > domain[i].hi;
    if (low && !high) {
      xp(i) = x(i) + h(i);
      out.grad(i) = (f(xp) - f(x)) / h(i);
      out.one_sided.push_back(static_cast<int>(i));
    } else if (high && !low) {
      xm(i) = x(i) - h(i);
      out.grad(i) = (f(x) - f(xm)) / h(i);
      out.one_sided.push_back(static_cast<int>(i));
    } else {
      xp(i) = x(i) + h(i);
      xm(i) = x(i) - h(i);
      out.grad(i) = (f(xp) - f(xm)) / (2.0 * h(i));
    }
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return out;
}

SampledFunction SampledFunction::from_surrogate(MarsSurrogate m) {
  SampledFunction s;
  s.domain_ = m.domain();
  s.label_ = m.label();
  auto shared = std::make_shared<const MarsSurrogate>(std::move(m));
  s.f_ = [shared](const Eigen::VectorXd& x) { return shared->evaluate(x); };
  s.grad_ = [shared](const Eigen::VectorXd& x) { return shared->gradient(x); };
  s.mode_ = GradientMode::analytic;
  return s;
}

SampledFunction SampledFunction::from_callable(
    std::function<double(const Eigen::VectorXd&)> f, Domain domain,
    std::string label, double rel_step) {
  if (!(rel_step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  SampledFunction s;
  s.f_ = std::move(f);
  s.domain_ = std::move(domain);
  s.label_ = std::move(label);
  s.mode_ = GradientMode::finite_difference;
  s.rel_step_ = rel_step;
  return s;
}

SampledFunction SampledFunction::from_callable_with_gradient(
    std::function<double(const Eigen::VectorXd&)> f,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad, Domain domain,
    std::string label) {
  SampledFunction s;
  s.f_ = std::move(f);
  s.grad_ = std::move(grad);
  s.domain_ = std::move(domain);
  s.label_ = std::move(label);
  s.mode_ = GradientMode::analytic;
  return s;
}

Eigen::VectorXd SampledFunction::gradient(const Eigen::VectorXd& x) const {
  if (mode_ == GradientMode::analytic) return grad_(x);
  Eigen::VectorXd h(p());
  for (int i = 0; i < p(); ++i) h(i) = rel_step_ * (domain_[i].hi - domain_[i].lo);
  return fd_gradient(f_, x, h, domain_).grad;
}

McEstimate mc_cmat(const SampledFunction& fk, const SampledFunction& fl,
                   const InputPrior& prior, long long B, std::uint64_t seed,
                   int threads) {
  if (B < 1) throw std::invalid_argument("mc_cmat: B must be >= 1");
  const int p = prior.p();
  if (fk.p() != p || fl.p() != p) {
    throw DimensionError("mc_cmat: functions and prior disagree on dimension");
  }
  const long long shards = (B + kShard - 1) / kShard;
  struct Partial {
    long long n = 0;
    Eigen::MatrixXd mean, m2;
  };
  std::vector<Partial> parts(shards);
  auto run_shard = [&](long long s) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
    const long long count = std::min(kShard, B - s * kShard);
    Partial part{0, Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
    for (long long b = 0; b < count; ++b) {
      const Eigen::VectorXd x = prior.sample(rng);
      const Eigen::MatrixXd outer = fk.gradient(x) * fl.gradient(x).transpose();
      ++part.n;
      const Eigen::MatrixXd d = outer - part.mean;
      part.mean += d / static_cast<double>(part.n);
      part.m2 += d.cwiseProduct(outer - part.mean);
    }
    parts[s] = std::move(part);
  };
  threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, shards)));
  if (threads == 1) {
    for (long long s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (long long s = w; s < shards; s += threads) run_shard(s);
      });
    }
  }
  // Chan et al. pairwise combination, in shard order.
  Partial total{0, Eigen::MatrixXd::Zero(p, p), Eigen::MatrixXd::Zero(p, p)};
  for (const auto& part : parts) {
    const double na = static_cast<double>(total.n), nb = static_cast<double>(part.n);
    const double n = na + nb;
    const Eigen::MatrixXd d = part.mean - total.mean;
    total.mean += d * (nb / n);
    total.m2 += part.m2 + d.cwiseProduct(d) * (na * nb / n);
    total.n += part.n;
  }
  McEstimate out;
  out.estimate = CoActiveMatrix::from_entries(total.mean, fk.label(), fl.label());
  out.se = B > 1 ? Eigen::MatrixXd((total.m2 / static_cast<double>(B - 1) /
                                    static_cast<double>(B))
                                       .cwiseSqrt())
                 : Eigen::MatrixXd::Zero(p, p);
  out.samples = B;
  out.seed = seed;
  out.h = std::max(fk.rel_step(), fl.rel_step());
  return out;
}

}  // namespace coas
