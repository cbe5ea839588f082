#include "oracle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace coas::oracle {
namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b;
  Eigen::VectorXd value;
  double error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece kronrod(const VectorIntegrand& f, double a, double b, int dim) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Eigen::VectorXd k15 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd g7 = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd fc = f(c);
  k15 += kWgk[7] * fc;
  g7 += kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const Eigen::VectorXd s = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    k15 += kWgk[j] * s;
    if (j % 2 == 1) g7 += kWg[j / 2] * s;
  }
  k15 *= h;
  g7 *= h;
  return {a, b, k15, (k15 - g7).cwiseAbs().maxCoeff()};
}

// Maps an infinite interval onto a finite one and returns the transformed
// integrand.
struct Mapped {
  VectorIntegrand f;
  double a, b;
};

Mapped map_interval(const VectorIntegrand& f, double a, double b) {
  if (std::isfinite(a) && std::isfinite(b)) return {f, a, b};
  if (std::isfinite(a)) {
    // x = a + t / (1 - t), t in [0, 1)
    return {[f, a](double t) {
              const double s = 1.0 - t;
              return Eigen::VectorXd(f(a + t / s) / (s * s));
            },
            0.0, 1.0};
  }
  if (std::isfinite(b)) {
    return {[f, b](double t) {
              const double s = 1.0 - t;
              return Eigen::VectorXd(f(b - t / s) / (s * s));
            },
            0.0, 1.0};
  }
  throw std::logic_error("doubly infinite interval must be split first");
}

}  // namespace

Eigen::VectorXd integrate(const VectorIntegrand& f, double a, double b,
                          std::vector<double> breaks, int dim,
                          const QuadratureOptions& opt) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
  if (!(a < b)) return total;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double x) { return !(x > a && x < b); }),
               breaks.end());
  if (!std::isfinite(a) && !std::isfinite(b) && breaks.empty()) breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> edges{a};
  edges.insert(edges.end(), breaks.begin(), breaks.end());
  edges.push_back(b);

  std::vector<Mapped> maps;
  std::priority_queue<std::pair<Piece, std::size_t>,
                      std::vector<std::pair<Piece, std::size_t>>,
                      decltype([](const auto& x, const auto& y) {
                        return x.first.error < y.first.error;
                      })>
      heap;
  double err = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    maps.push_back(map_interval(f, edges[s], edges[s + 1]));
    Piece pc = kronrod(maps.back().f, maps.back().a, maps.back().b, dim);
    total += pc.value;
    err += pc.error;
    heap.push({std::move(pc), maps.size() - 1});
  }
  int intervals = static_cast<int>(heap.size());
  while (!heap.empty() && intervals < opt.max_intervals) {
    const double scale = total.cwiseAbs().maxCoeff();
    if (err <= std::max(opt.abs_tol, opt.rel_tol * scale)) break;
    auto [worst, m] = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Piece left = kronrod(maps[m].f, worst.a, mid, dim);
    Piece right = kronrod(maps[m].f, mid, worst.b, dim);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push({std::move(left), m});
    heap.push({std::move(right), m});
    ++intervals;
  }
  return total;
}

double integrate_scalar(const std::function<double(double)>& f, double a,
                        double b, std::vector<double> breaks,
                        const QuadratureOptions& opt) {
  return integrate(
      [&f](double x) { return Eigen::VectorXd::Constant(1, f(x)); }, a, b,
      std::move(breaks), 1, opt)(0);
}

double moment_by_quadrature(const Marginal& mu, int r, double a, double b) {
  const auto [lo, hi] = mu.support();
  a = std::max(a, lo);
  b = std::min(b, hi);
  std::vector<double> breaks;
  if (!mu.is_uniform()) breaks.push_back(mu.mean());
  return integrate_scalar(
      [&](double x) { return std::pow(x, r) * mu.pdf(x); }, a, b, breaks);
}

Eigen::MatrixXd cmat_by_quadrature(const MarsSurrogate& mk,
                                   const MarsSurrogate& ml,
                                   const InputPrior& prior,
                                   const QuadratureOptions& opt) {
  const int p = prior.p();
  if (mk.p() != p || ml.p() != p) throw std::invalid_argument("dimension mismatch");
  std::vector<std::vector<double>> breaks(p);
  for (const auto* m : {&mk, &ml}) {
    for (const auto& t : m->terms()) {
      for (const auto& f : t.factors) breaks[f.var].push_back(f.knot);
    }
  }
  for (int i = 0; i < p; ++i) {
    if (!prior[i].is_uniform()) breaks[i].push_back(prior[i].mean());
  }
  const int dim = p * p;
  Eigen::VectorXd x(p);
  std::function<Eigen::VectorXd(int)> level = [&](int i) -> Eigen::VectorXd {
    if (i == p) {
      const Eigen::VectorXd gk = mk.gradient(x), gl = ml.gradient(x);
      Eigen::VectorXd out(dim);
      for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) out(r * p + c) = gk(r) * gl(c);
      }
      return out;
    }
    const auto [lo, hi] = prior[i].support();
    return integrate(
        [&, i](double xi) -> Eigen::VectorXd {
          const double w = prior[i].pdf(xi);
          if (w == 0.0) return Eigen::VectorXd::Zero(dim);
          x(i) = xi;
          return w * level(i + 1);
        },
        lo, hi, breaks[i], dim, opt);
  };
  const Eigen::VectorXd flat = level(0);
  Eigen::MatrixXd C(p, p);
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c) C(r, c) = flat(r * p + c);
  }
  return C;
}

}  // namespace coas::oracle
