#include "coas/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "coas/error.hpp"
#include "coas/random.hpp"

namespace coas {

const HingeFactor* BasisTerm::factor_for(int var) const {
  for (const auto& f : factors) {
    if (f.var == var) return &f;
  }
  return nullptr;
}

MarsSurrogate::MarsSurrogate(Domain domain, double intercept,
                             std::vector<BasisTerm> terms, std::string label)
    : domain_(std::move(domain)),
      intercept_(intercept),
      terms_(std::move(terms)),
      label_(std::move(label)) {
  const int dim = p();
  if (dim < 1) throw DimensionError("surrogate needs at least one input");
  for (const auto& iv : domain_) {
    if (!(iv.lo < iv.hi)) {
      throw std::invalid_argument("surrogate domain requires lo < hi");
    }
  }
  for (const auto& t : terms_) {
    if (t.factors.empty()) {
      throw std::invalid_argument(
          "basis term without factors; fold it into the intercept");
    }
    std::vector<bool> seen(dim, false);
    for (const auto& f : t.factors) {
      if (f.var < 0 || f.var >= dim) {
        throw DimensionError("hinge factor input index out of range");
      }
      if (seen[f.var]) {
        throw std::invalid_argument("basis term repeats an input");
      }
      seen[f.var] = true;
      if (f.sign != 1 && f.sign != -1) {
        throw std::invalid_argument("hinge sign must be +1 or -1");
      }
      const auto& iv = domain_[f.var];
      if (!(f.knot >= iv.lo && f.knot <= iv.hi)) {
        std::ostringstream os;
        os << "knot " << f.knot << " outside domain of input " << f.var;
        throw std::invalid_argument(os.str());
      }
    }
  }
}

MarsSurrogate MarsSurrogate::constant(Domain domain, double value,
                                      std::string label) {
  return MarsSurrogate(std::move(domain), value, {}, std::move(label));
}

int MarsSurrogate::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.degree());
  return d;
}

double MarsSurrogate::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != p()) throw DimensionError("evaluate: input has wrong length");
  double out = intercept_;
  for (const auto& t : terms_) {
    double prod = t.coef;
    for (const auto& f : t.factors) {
      prod *= f.value(x(f.var));
      if (prod == 0.0) break;
    }
    out += prod;
  }
  return out;
}

Eigen::VectorXd MarsSurrogate::evaluate_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != p()) throw DimensionError("evaluate: matrix has wrong width");
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    out(r) = evaluate(X.row(r).transpose());
  }
  return out;
}

Eigen::VectorXd MarsSurrogate::gradient(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != p()) throw DimensionError("gradient: input has wrong length");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p());
  std::vector<double> vals;
  for (const auto& t : terms_) {
    const auto d = t.factors.size();
    vals.resize(d);
    for (std::size_t a = 0; a < d; ++a) vals[a] = t.factors[a].value(x(t.factors[a].var));
    for (std::size_t a = 0; a < d; ++a) {
      const auto& f = t.factors[a];
      double prod = t.coef * f.slope(x(f.var));
      for (std::size_t b = 0; b < d && prod != 0.0; ++b) {
        if (b != a) prod *= vals[b];
      }
      g(f.var) += prod;
    }
  }
  return g;
}

MarsSurrogate MarsSurrogate::relabeled(std::string label) const {
  MarsSurrogate out = *this;
  out.label_ = std::move(label);
  return out;
}

Ensemble::Ensemble(std::string label, std::vector<MarsSurrogate> members)
    : label_(std::move(label)), members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble is empty");
  for (const auto& m : members_) {
    if (m.domain() != members_.front().domain()) {
      throw DimensionError("ensemble members disagree on p or domain");
    }
  }
}

// ---------------------------------------------------------------------------
// Fitting. Inputs are mapped to the unit cube and the response standardized;
// the result is mapped back at the end.

namespace {

struct Candidate {
  double gain = -1.0;
  int parent = -1;
  int var = -1;
  double knot = 0.0;
};

int friedman_endspan(int p, double alpha = 0.05) {
  return static_cast<int>(std::ceil(3.0 - std::log2(alpha / p)));
}

int friedman_minspan(int p, int eligible, double alpha = 0.05) {
  if (eligible < 1) return 1;
  const double v = -std::log2(-std::log(1.0 - alpha) / (p * eligible)) / 2.5;
  return std::max(1, static_cast<int>(std::floor(v)));
}

class ForwardPass {
 public:
  ForwardPass(const Eigen::MatrixXd& U, const Eigen::VectorXd& y,
              const FitConfig& cfg)
      : U_(U), cfg_(cfg), n_(U.rows()), p_(U.cols()) {
    Q_.resize(n_, cfg.max_terms + 2);
    Q_.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n_)));
    cols_ = 1;
    values_.push_back(Eigen::VectorXd::Ones(n_));
    terms_.push_back({});
    resid_ = y - Q_.col(0) * Q_.col(0).dot(y);
    order_.resize(p_);
    for (int v = 0; v < p_; ++v) {
      auto& o = order_[v];
      o.resize(n_);
      std::iota(o.begin(), o.end(), 0);
      std::stable_sort(o.begin(), o.end(),
                       [&](int a, int b) { return U_(a, v) < U_(b, v); });
    }
  }

  void run() {
    const double sst = resid_.squaredNorm();
    if (sst <= 0.0) return;
    while (static_cast<int>(terms_.size()) - 1 + 2 <= cfg_.max_terms) {
      if (resid_.squaredNorm() <= 1e-26 * sst) break;
      Candidate best;
      for (int parent = 0; parent < static_cast<int>(terms_.size()); ++parent) {
        if (terms_[parent].degree() >= cfg_.max_degree) continue;
        for (int v = 0; v < p_; ++v) {
          if (terms_[parent].factor_for(v)) continue;
          search(parent, v, best);
        }
      }
      if (best.parent < 0 || best.gain < cfg_.forward_tolerance * sst) break;
      const std::size_t before = terms_.size();
      add_term(best.parent, {best.var, 1, best.knot});
      add_term(best.parent, {best.var, -1, best.knot});
      if (terms_.size() == before) break;
    }
  }

  // Terms excluding the constant, with their unit-scale column values.
  std::vector<BasisTerm> terms() const {
    return {terms_.begin() + 1, terms_.end()};
  }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }

 private:
  // Makes v orthogonal to the current Q columns; returns the residual norm.
  double orthogonalize(Eigen::VectorXd& v) const {
    for (int pass = 0; pass < 2; ++pass) {
      const auto Qc = Q_.leftCols(cols_);
      v -= Qc * (Qc.transpose() * v);
    }
    return v.norm();
  }

  void add_term(int parent, HingeFactor f) {
    Eigen::VectorXd col(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      col(i) = values_[parent](i) * f.value(U_(i, f.var));
    }
    Eigen::VectorXd q = col;
    const double raw = col.norm();
    const double nq = orthogonalize(q);
    if (!(raw > 0.0) || nq <= 1e-9 * raw) return;
    q /= nq;
    Q_.col(cols_++) = q;
    resid_ -= q * q.dot(resid_);
    BasisTerm t = terms_[parent];
    t.factors.push_back(f);
    terms_.push_back(std::move(t));
    values_.push_back(std::move(col));
  }

  // Best knot for child hinges of `parent` on input v. The pair
  // {b (x-t)_+, b (t-x)_+} spans the same space as {b x, b (x-t)_+} once b
  // is in the basis, so the knot-free column b x is projected out first and
  // the knot sweep scores the single column b (x-t)_+ via suffix sums.
  void search(int parent, int v, Candidate& best) const {
    const Eigen::VectorXd& b = values_[parent];
    std::vector<int> rows;
    rows.reserve(n_);
    for (int i : order_[v]) {
      if (b(i) != 0.0) rows.push_back(i);
    }
    const int m = static_cast<int>(rows.size());
    const int endspan = cfg_.endspan >= 0 ? cfg_.endspan : friedman_endspan(p_);
    const int minspan =
        cfg_.minspan >= 0 ? std::max(1, cfg_.minspan) : friedman_minspan(p_, m);
    if (m < 2 * endspan + 2) return;

    Eigen::VectorXd lin = b.cwiseProduct(U_.col(v));
    const double lin_norm = lin.norm();
    const double nl = orthogonalize(lin);
    Eigen::VectorXd r = resid_;
    double lin_gain = 0.0;
    int k = cols_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        basis(n_, cols_ + 1);
    basis.leftCols(cols_) = Q_.leftCols(cols_);
    if (lin_norm > 0.0 && nl > 1e-9 * lin_norm) {
      lin /= nl;
      const double rl = lin.dot(r);
      lin_gain = rl * rl;
      r -= lin * rl;
      basis.col(cols_) = lin;
      k = cols_ + 1;
    }

    Eigen::VectorXd A = Eigen::VectorXd::Zero(k);  // sum Q_j b x
    Eigen::VectorXd B = Eigen::VectorXd::Zero(k);  // sum Q_j b
    double s_rbx = 0, s_rb = 0, s_bbxx = 0, s_bbx = 0, s_bb = 0;
    int since_last = minspan;  // knots allowed immediately at the first slot
    for (int pos = m - 1; pos >= 1; --pos) {
      const int i = rows[pos];
      const double bi = b(i), xi = U_(i, v), bx = bi * xi;
      s_rbx += r(i) * bx;
      s_rb += r(i) * bi;
      s_bbxx += bx * bx;
      s_bbx += bi * bx;
      s_bb += bi * bi;
      for (int j = 0; j < k; ++j) {
        A(j) += basis(i, j) * bx;
        B(j) += basis(i, j) * bi;
      }
      // Knot at rows[pos-1]; the hinge is active on positions >= pos.
      const int beyond = m - pos;
      const double t = U_(rows[pos - 1], v);
      if (t == xi) continue;  // inside a tie group
      ++since_last;
      if (beyond < endspan || pos - 1 < endspan) continue;
      if (since_last < minspan) continue;
      const double rc = s_rbx - t * s_rb;
      const double cc = s_bbxx - 2.0 * t * s_bbx + t * t * s_bb;
      if (!(cc > 0.0)) continue;
      double proj = 0.0;
      for (int j = 0; j < k; ++j) {
        const double c = A(j) - t * B(j);
        proj += c * c;
      }
      const double den = cc - proj;
      if (!(den > 1e-10 * cc)) continue;
      since_last = 0;
      const double gain = lin_gain + rc * rc / den;
      if (gain > best.gain) best = {gain, parent, v, t};
    }
  }

  const Eigen::MatrixXd& U_;
  const FitConfig& cfg_;
  Eigen::Index n_;
  int p_;
  Eigen::MatrixXd Q_;
  int cols_ = 0;
  Eigen::VectorXd resid_;
  std::vector<BasisTerm> terms_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<std::vector<int>> order_;
};

struct SubsetFit {
  Eigen::VectorXd coef;  // intercept first
  double rss = 0.0;
  Eigen::VectorXd delete_cost;  // RSS increase from dropping each column
};

SubsetFit fit_subset(const Eigen::MatrixXd& basis, const std::vector<int>& cols,
                     const Eigen::VectorXd& y) {
  const Eigen::Index n = basis.rows();
  Eigen::MatrixXd M(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) M.col(j) = basis.col(cols[j]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::Index k = M.cols();
  Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k);
  SubsetFit out;
  out.coef = R.triangularView<Eigen::Upper>().solve(qty);
  out.rss = (y - M * out.coef).squaredNorm();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(k, k));
  out.delete_cost.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = Rinv.row(j).squaredNorm();
    out.delete_cost(j) = d > 0.0 ? out.coef(j) * out.coef(j) / d
                                 : std::numeric_limits<double>::infinity();
  }
  return out;
}

double gcv(double rss, int n, int terms_incl_intercept, double penalty) {
  const double c = terms_incl_intercept + penalty * (terms_incl_intercept - 1) / 2.0;
  if (c >= n) return std::numeric_limits<double>::infinity();
  const double d = 1.0 - c / n;
  return rss / n / (d * d);
}

}  // namespace

FitResult fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
              const Eigen::Ref<const Eigen::VectorXd>& y, const Domain& domain,
              const FitConfig& cfg, std::string label) {
  const Eigen::Index n = X.rows();
  const int p = static_cast<int>(X.cols());
  if (y.size() != n) throw DimensionError("fit: X and y row counts differ");
  if (static_cast<int>(domain.size()) != p) {
    throw DimensionError("fit: domain length differs from X width");
  }
  if (n < std::max(cfg.min_samples, 2)) {
    throw std::invalid_argument("fit: too few samples (" + std::to_string(n) +
                                ")");
  }
  if (cfg.max_terms < 0 || cfg.max_degree < 1) {
    throw std::invalid_argument("fit: max_terms >= 0 and max_degree >= 1 required");
  }
  Eigen::MatrixXd U(n, p);
  for (int v = 0; v < p; ++v) {
    const double lo = domain[v].lo, w = domain[v].hi - domain[v].lo;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = X(i, v);
      if (!(x >= lo - 1e-12 * w && x <= domain[v].hi + 1e-12 * w)) {
        throw std::invalid_argument("fit: row " + std::to_string(i) +
                                    " outside the domain of input " +
                                    std::to_string(v));
      }
      U(i, v) = std::clamp((x - lo) / w, 0.0, 1.0);
    }
  }

  const double ymean = y.mean();
  const double ysd = std::sqrt((y.array() - ymean).square().sum() / n);
  FitResult out{MarsSurrogate::constant(domain, ymean, label)};
  if (!(ysd > 1e-14 * std::max(1.0, std::abs(ymean)))) {
    out.constant_response = true;
    out.r2 = 1.0;
    out.rmse = std::sqrt((y.array() - ymean).square().mean());
    return out;
  }
  const Eigen::VectorXd ys = (y.array() - ymean) / ysd;

  ForwardPass forward(U, ys, cfg);
  forward.run();
  const auto candidates = forward.terms();
  const int T = static_cast<int>(candidates.size());
  out.forward_terms = T;

  Eigen::MatrixXd basis(n, T + 1);
  for (int j = 0; j <= T; ++j) basis.col(j) = forward.values()[j];

  std::vector<int> active(T + 1);
  std::iota(active.begin(), active.end(), 0);
  std::vector<int> best_set = active;
  double best_gcv = std::numeric_limits<double>::infinity();
  while (true) {
    const SubsetFit sf = fit_subset(basis, active, ys);
    const double g = gcv(sf.rss, static_cast<int>(n),
                         static_cast<int>(active.size()), cfg.penalty);
    if (g <= best_gcv) {
      best_gcv = g;
      best_set = active;
    }
    if (active.size() == 1) break;
    Eigen::Index drop = 1;
    for (Eigen::Index j = 2; j < sf.delete_cost.size(); ++j) {
      if (sf.delete_cost(j) < sf.delete_cost(drop)) drop = j;
    }
    active.erase(active.begin() + drop);
  }

  const SubsetFit final_fit = fit_subset(basis, best_set, ys);
  double intercept = ymean + ysd * final_fit.coef(0);
  std::vector<BasisTerm> terms;
  for (std::size_t j = 1; j < best_set.size(); ++j) {
    BasisTerm t = candidates[best_set[j] - 1];
    double scale = ysd;
    for (auto& f : t.factors) {
      const double w = domain[f.var].hi - domain[f.var].lo;
      f.knot = domain[f.var].lo + f.knot * w;
      f.knot = std::clamp(f.knot, domain[f.var].lo, domain[f.var].hi);
      scale /= w;
    }
    t.coef = final_fit.coef(j) * scale;
    if (t.coef != 0.0) terms.push_back(std::move(t));
  }
  out.model = MarsSurrogate(domain, intercept, std::move(terms), std::move(label));
  const Eigen::VectorXd pred = out.model.evaluate_rows(X);
  const double sse = (y - pred).squaredNorm();
  out.rmse = std::sqrt(sse / n);
  out.r2 = 1.0 - sse / (ysd * ysd * n);
  out.gcv = best_gcv * ysd * ysd;
  return out;
}

Ensemble fit_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Domain& domain, const FitConfig& cfg, int B,
                      std::uint64_t seed, std::string label, int threads) {
  if (B < 1) throw std::invalid_argument("fit_ensemble: B must be >= 1");
  const Eigen::Index n = X.rows();
  // Resample indices up front so results do not depend on thread count.
  std::vector<std::vector<Eigen::Index>> draws(B);
  for (int b = 1; b < B; ++b) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
    draws[b].resize(n);
    for (auto& r : draws[b]) r = static_cast<Eigen::Index>(rng.below(n));
  }
  std::vector<std::optional<MarsSurrogate>> members(B);
  std::vector<std::exception_ptr> errors(B);
  auto work = [&](int b) {
    try {
      const std::string name = label + "#" + std::to_string(b);
      if (b == 0) {
        members[b] = fit(X, y, domain, cfg, name).model;
        return;
      }
      Eigen::MatrixXd Xb(n, X.cols());
      Eigen::VectorXd yb(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        Xb.row(i) = X.row(draws[b][i]);
        yb(i) = y(draws[b][i]);
      }
      members[b] = fit(Xb, yb, domain, cfg, name).model;
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };
  threads = std::max(1, std::min(threads, B));
  if (threads == 1) {
    for (int b = 0; b < B; ++b) work(b);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int b = w; b < B; b += threads) work(b);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<MarsSurrogate> out;
  out.reserve(B);
  for (auto& m : members) out.push_back(std::move(*m));
  return Ensemble(std::move(label), std::move(out));
}

double cv_rmspe(const Eigen::Ref<const Eigen::MatrixXd>& X,
                const Eigen::Ref<const Eigen::VectorXd>& y, const Domain& domain,
                const FitConfig& cfg, int folds, std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (folds < 2 || folds > n) {
    throw std::invalid_argument("cv: folds must be in [2, n]");
  }
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }
  double sse = 0.0;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds, hi = n * (f + 1) / folds;
    Eigen::MatrixXd Xtr(n - (hi - lo), X.cols());
    Eigen::VectorXd ytr(n - (hi - lo));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      Xtr.row(r) = X.row(perm[i]);
      ytr(r++) = y(perm[i]);
    }
    const auto model = fit(Xtr, ytr, domain, cfg).model;
    for (Eigen::Index i = lo; i < hi; ++i) {
      const double e = y(perm[i]) - model.evaluate(X.row(perm[i]).transpose());
      sse += e * e;
    }
  }
  const double mean = y.mean();
  const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1));
  const double rmspe = std::sqrt(sse / n);
  return sd > 0.0 ? rmspe / sd : rmspe;
}

}  // namespace coas
