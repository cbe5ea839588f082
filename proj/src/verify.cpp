#include "coas/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>

#include "coas/analysis.hpp"
#include "coas/closedform.hpp"
#include "coas/cluster.hpp"
#include "coas/fixtures.hpp"
#include "coas/model.hpp"
#include "coas/montecarlo.hpp"
#include "coas/random.hpp"
#include "oracle/quadrature.hpp"

namespace coas::verify {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

const std::vector<std::string> kNames = {
    "poly",     "surrogate", "direction", "piston",   "metric",
    "identities", "quadrature", "gradient", "poincare", "cluster"};

const double kBudget[] = {1.0, 60.0, 60.0, 300.0, 300.0,
                          300.0, 300.0, 300.0, 300.0, 120.0};

Domain unit_box(int p) { return Domain(p, Interval{0.0, 1.0}); }

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
}

Eigen::VectorXd sample_response(const Eigen::MatrixXd& X,
                                const std::function<double(const Eigen::VectorXd&)>& f) {
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = f(X.row(i).transpose());
  return y;
}

MarsSurrogate fit_poly(double beta, int n, std::uint64_t seed) {
  const Domain d = unit_box(2);
  const Eigen::MatrixXd X = lhs_design(n, 2, d, seed);
  const Eigen::VectorXd y = sample_response(
      X, [beta](const Eigen::VectorXd& x) { return fixtures::poly(x, beta); });
  return fit(X, y, d, {}, "poly").model;
}

// Exact co-active matrices of the polynomial pair on the unit square.
Eigen::Matrix2d exact_c1() {
  Eigen::Matrix2d c;
  c << 480, 165, 165, 60;
  return c / 180.0;
}

Eigen::Matrix2d exact_c2(double beta) {
  Eigen::Matrix2d c;
  c << 480, 165 + 315 * beta, 165 + 315 * beta, 60 + beta * (324 * beta + 180);
  return c / 180.0;
}

Eigen::Matrix2d exact_c12(double beta) {
  Eigen::Matrix2d c;
  c << 480, 165 + 315 * beta, 165, 60 + 90 * beta;
  return c / 180.0;
}

// Random polynomial on [0,1]^p: a handful of monomials of total degree <= 3.
std::function<double(const Eigen::VectorXd&)> random_polynomial(Rng& rng, int p) {
  struct Monomial {
    double coef;
    std::vector<int> powers;
  };
  std::vector<Monomial> terms;
  const int count = 2 + static_cast<int>(rng.below(5));
  for (int t = 0; t < count; ++t) {
    Monomial m{4.0 * rng.uniform() - 2.0, std::vector<int>(p, 0)};
    const int degree = 1 + static_cast<int>(rng.below(3));
    for (int d = 0; d < degree; ++d) ++m.powers[rng.below(p)];
    terms.push_back(std::move(m));
  }
  return [terms](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (const auto& m : terms) {
      double v = m.coef;
      for (std::size_t i = 0; i < m.powers.size(); ++i) v *= std::pow(x(i), m.powers[i]);
      s += v;
    }
    return s;
  };
}

std::vector<MarsSurrogate> random_corpus(int count, int p, int n, int max_terms,
                                         std::uint64_t seed, int threads) {
  std::vector<std::optional<MarsSurrogate>> out(count);
  parallel_for(count, threads, [&](int i) {
    Rng rng = Rng::stream(seed, 1000 + i);
    const auto f = random_polynomial(rng, p);
    const Domain d = unit_box(p);
    const Eigen::MatrixXd X = lhs_design(n, p, d, rng.next(), 0);
    FitConfig cfg;
    cfg.max_terms = max_terms;
    cfg.max_degree = std::min(p, 2);
    out[i] = fit(X, sample_response(X, f), d, cfg, "m" + std::to_string(i)).model;
  });
  std::vector<MarsSurrogate> models;
  for (auto& m : out) models.push_back(std::move(*m));
  return models;
}

// Corpus of dimension <= 3 used by both the quadrature and gradient checks.
std::vector<MarsSurrogate> small_corpus(std::uint64_t seed, int threads) {
  std::vector<MarsSurrogate> models;
  for (int p = 1; p <= 3; ++p) {
    const int count = p == 1 ? 12 : 14;
    auto part = random_corpus(count, p, 60 + 20 * p, 9, seed + 31 * p, threads);
    models.insert(models.end(), part.begin(), part.end());
  }
  return models;
}

CriterionResult ac_poly(const VerifyOptions&) {
  CriterionResult r;
  const double betas[] = {0.5, 3.0, -12.0};
  const double expected[] = {0.944, 0.551, -0.131};
  const Eigen::Matrix2d c1 = exact_c1();
  bool ok = true;
  json cases = json::array();
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix2d c2 = exact_c2(betas[i]);
    const Eigen::Matrix2d c12 = exact_c12(betas[i]);
    const auto dec = decompose(symmetrize(c12, Eigen::MatrixXd(c12.transpose())),
                               c1.trace(), c2.trace());
    const double rounded = std::round(dec.concordance * 1000.0) / 1000.0;
    const bool pass = std::abs(rounded - expected[i]) < 5e-7;
    ok = ok && pass;
    cases.push_back({{"beta", betas[i]},
                     {"kappa", dec.concordance},
                     {"rounded", rounded},
                     {"expected", expected[i]},
                     {"pass", pass}});
  }
  r.passed = ok;
  r.measured = cases;
  r.detail = "kappa rounded to 3 decimals";
  return r;
}

CriterionResult ac_surrogate(const VerifyOptions& opt) {
  CriterionResult r;
  const auto m1 = fit_poly(0.0, 1000, opt.seed);
  const auto m2 = fit_poly(3.0, 1000, opt.seed);
  const auto c12 = cmat(m1, m2, InputPrior::uniform_box(2));
  Eigen::Matrix2d target;
  target << 2.667, 6.167, 0.917, 1.833;
  const double fro = (c12.entries - target).norm();
  const double fro_exact = (c12.entries - exact_c12(3.0)).norm();
  r.passed = fro <= 0.1;
  r.measured = {{"frobenius", fro},
                {"frobenius_exact", fro_exact},
                {"tolerance", 0.1},
                {"c12", {c12.entries(0, 0), c12.entries(0, 1), c12.entries(1, 0),
                         c12.entries(1, 1)}}};
  return r;
}

CriterionResult ac_direction(const VerifyOptions& opt) {
  CriterionResult r;
  const auto m1 = fit_poly(0.0, 1000, opt.seed);
  const auto m2 = fit_poly(0.5, 1000, opt.seed);
  const auto prior = InputPrior::uniform_box(2);
  const auto c12 = cmat(m1, m2, prior);
  const auto c21 = cmat(m2, m1, prior);
  const double t1 = cotrace(m1, m1, prior), t2 = cotrace(m2, m2, prior);
  const auto dec = decompose(symmetrize(c12.entries, c21.entries), t1, t2);
  const Eigen::Vector2d w = dec.eigvecs.col(0);
  const Eigen::Vector2d pi = dec.contributions;
  const double dw = std::max(std::abs(w(0) - 0.907), std::abs(w(1) - 0.422));
  const bool w_ok = dw < 0.03;
  const bool pi0_ok = std::abs(pi(0) - 0.9518) <= 0.01;
  const bool pi1_ok = std::abs(pi(1) + 0.0077) <= 0.005;
  r.passed = w_ok && pi0_ok && pi1_ok;
  r.measured = {{"w1", {w(0), w(1)}},
                {"pi", {pi(0), pi(1)}},
                {"max_w_error", dw},
                {"w_pass", w_ok},
                {"pi1_pass", pi0_ok},
                {"pi2_pass", pi1_ok},
                {"kappa", dec.concordance}};
  return r;
}

CriterionResult ac_piston(const VerifyOptions& opt) {
  CriterionResult r;
  const Domain d = unit_box(5);
  const auto prior = InputPrior::uniform_box(5);
  auto f1 = [](const Eigen::VectorXd& x) { return fixtures::piston(x, 90000.0, 284.0); };
  auto f2 = [](const Eigen::VectorXd& x) { return fixtures::piston(x, 110000.0, 302.0); };
  const Eigen::MatrixXd X = lhs_design(1000, 5, d, opt.seed);
  const auto m1 = fit(X, sample_response(X, f1), d, {}, "piston1").model;
  const auto m2 = fit(X, sample_response(X, f2), d, {}, "piston2").model;
  const auto cf = cmat(m1, m2, prior);
  const auto mc = mc_cmat(SampledFunction::from_callable(f1, d, "piston1"),
                          SampledFunction::from_callable(f2, d, "piston2"), prior,
                          100000, opt.seed, opt.threads);
  const double rel = (mc.estimate.entries - cf.entries).norm() /
                     mc.estimate.entries.norm();
  r.passed = rel <= 0.05;
  r.measured = {{"relative_frobenius", rel},
                {"tolerance", 0.05},
                {"mc_max_se", mc.se.maxCoeff()},
                {"terms", {m1.terms().size(), m2.terms().size()}}};
  return r;
}

CriterionResult ac_metric(const VerifyOptions& opt) {
  CriterionResult r;
  const int n = 50;
  const auto models = random_corpus(n, 3, 200, 21, opt.seed, opt.threads);
  const auto prior = InputPrior::uniform_box(3);
  Eigen::VectorXd self(n);
  for (int i = 0; i < n; ++i) self(i) = cotrace(models[i], models[i], prior);
  Eigen::MatrixXd D(n, n);
  parallel_for(n * n, opt.threads, [&](int idx) {
    const int i = idx / n, j = idx % n;
    const double t = cotrace(models[i], models[j], prior);
    D(i, j) = discordance(concordance(t, self(i), self(j)));
  });
  double min_d = D.minCoeff();
  double max_asym = (D - D.transpose()).cwiseAbs().maxCoeff();
  double max_diag = D.diagonal().cwiseAbs().maxCoeff();
  double worst_slack = std::numeric_limits<double>::infinity();
  long long triangles = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        ++triangles;
        worst_slack = std::min({worst_slack, D(i, j) + D(j, k) - D(i, k),
                                D(i, j) + D(i, k) - D(j, k),
                                D(i, k) + D(j, k) - D(i, j)});
      }
    }
  }
  r.passed = min_d >= 0.0 && max_asym <= 1e-10 && max_diag <= 1e-10 &&
             worst_slack >= -1e-9;
  r.measured = {{"min_discordance", min_d},
                {"max_asymmetry", max_asym},
                {"max_self_distance", max_diag},
                {"min_triangle_slack", worst_slack},
                {"triangles", triangles},
                {"max_discordance", D.maxCoeff()}};
  return r;
}

CriterionResult ac_identities(const VerifyOptions& opt) {
  CriterionResult r;
  std::vector<MarsSurrogate> models = random_corpus(30, 3, 200, 21, opt.seed, opt.threads);
  const auto prior = InputPrior::uniform_box(3);
  const int n = static_cast<int>(models.size());
  std::vector<CoActiveMatrix> c(static_cast<std::size_t>(n) * n);
  parallel_for(n * n, opt.threads, [&](int idx) {
    c[idx] = cmat(models[idx / n], models[idx % n], prior);
  });
  double sum_pi = 0.0, sum_lambda = 0.0, max_kappa = 0.0, q1 = 0.0;
  double self_neg = 0.0, self_sum = 0.0;
  long long pairs = 0;
  auto check = [&](const Eigen::MatrixXd& V, double tk, double tl, bool self) {
    const auto dec = decompose(V, tk, tl);
    sum_pi = std::max(sum_pi, std::abs(dec.contributions.sum() - dec.concordance));
    sum_lambda = std::max(sum_lambda, std::abs(dec.eigvals.sum() - V.trace()) /
                                          std::max(std::abs(V.trace()), 1e-300));
    max_kappa = std::max(max_kappa, std::abs(dec.concordance));
    const auto s = activity_scores(dec, 1);
    q1 = std::max(q1, (s.signed_scores.cwiseAbs() - s.unsigned_scores).cwiseAbs().maxCoeff() /
                          std::max(s.unsigned_scores.maxCoeff(), 1e-300));
    if (self) {
      self_neg = std::min(self_neg, dec.contributions.minCoeff());
      self_sum = std::max(self_sum, std::abs(dec.contributions.sum() - 1.0));
    }
    ++pairs;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto& cij = c[i * n + j];
      const auto& cji = c[j * n + i];
      check(symmetrize(cij.entries, cji.entries), c[i * n + i].trace,
            c[j * n + j].trace, i == j);
    }
  }
  for (double beta : {0.5, 3.0, -12.0}) {
    const Eigen::MatrixXd c12 = exact_c12(beta);
    check(symmetrize(c12, Eigen::MatrixXd(c12.transpose())), exact_c1().trace(),
          exact_c2(beta).trace(), false);
    check(exact_c2(beta), exact_c2(beta).trace(), exact_c2(beta).trace(), true);
  }
  r.passed = sum_pi <= 1e-12 && sum_lambda <= 1e-10 && max_kappa <= 1.0 &&
             q1 <= 1e-12 && self_neg >= -1e-12 && self_sum <= 1e-12;
  r.measured = {{"pairs", pairs},
                {"max_sum_pi_minus_kappa", sum_pi},
                {"max_rel_sum_lambda_minus_trace", sum_lambda},
                {"max_abs_kappa", max_kappa},
                {"max_q1_signed_unsigned_gap", q1},
                {"min_self_contribution", self_neg},
                {"max_self_sum_minus_one", self_sum}};
  return r;
}

InputPrior normal_prior(int p) {
  const std::vector<Marginal> all = {Marginal(Normal{0.5, 0.25}),
                                     Marginal(Normal{0.45, 0.3, 0.0, 1.0}),
                                     Marginal(Normal{0.6, 0.2, 0.1, kInf})};
  return InputPrior(std::vector<Marginal>(all.begin(), all.begin() + p));
}

CriterionResult ac_quadrature(const VerifyOptions& opt) {
  CriterionResult r;
  const auto models = small_corpus(opt.seed, opt.threads);
  // 20 pairs: consecutive models of equal dimension.
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i + 1 < models.size() && pairs.size() < 20; i += 2) {
    if (models[i].p() == models[i + 1].p()) pairs.emplace_back(i, i + 1);
  }
  const int jobs = static_cast<int>(pairs.size()) * 2;
  std::vector<double> worst(jobs, 0.0);
  parallel_for(jobs, opt.threads, [&](int idx) {
    const auto [a, b] = pairs[idx / 2];
    const int p = models[a].p();
    const InputPrior prior = idx % 2 == 0 ? InputPrior::uniform_box(p) : normal_prior(p);
    const Eigen::MatrixXd C = cmat(models[a], models[b], prior).entries;
    const Eigen::MatrixXd Q = oracle::cmat_by_quadrature(models[a], models[b], prior);
    const double floor = 1e-300 + 1e-8 * Q.cwiseAbs().maxCoeff();
    double e = 0.0;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        e = std::max(e, std::abs(C(i, j) - Q(i, j)) / std::max(std::abs(Q(i, j)), floor));
      }
    }
    worst[idx] = e;
  });
  double uni = 0.0, nor = 0.0;
  for (int i = 0; i < jobs; ++i) (i % 2 == 0 ? uni : nor) = std::max(i % 2 == 0 ? uni : nor, worst[i]);
  r.passed = pairs.size() == 20 && uni <= 1e-6 && nor <= 1e-6;
  r.measured = {{"pairs", pairs.size()},
                {"max_rel_error_uniform", uni},
                {"max_rel_error_normal", nor},
                {"tolerance", 1e-6}};
  return r;
}

CriterionResult ac_gradient(const VerifyOptions& opt) {
  CriterionResult r;
  auto models = small_corpus(opt.seed, opt.threads);
  for (double beta : {0.0, 0.5, 3.0}) models.push_back(fit_poly(beta, 300, opt.seed));
  const double h = 1e-6;
  double worst = 0.0;
  long long points = 0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const auto& model = models[m];
    Rng rng = Rng::stream(opt.seed, 5000 + m);
    int done = 0;
    while (done < 100) {
      Eigen::VectorXd x(model.p());
      for (int i = 0; i < model.p(); ++i) x(i) = rng.uniform();
      bool near_knot = false;
      for (const auto& t : model.terms()) {
        for (const auto& f : t.factors) near_knot |= std::abs(x(f.var) - f.knot) < 10 * h;
      }
      if (near_knot) continue;
      const Eigen::VectorXd g = model.gradient(x);
      for (int i = 0; i < model.p(); ++i) {
        Eigen::VectorXd up = x, dn = x;
        up(i) += h;
        dn(i) -= h;
        const double fd = (model.evaluate(up) - model.evaluate(dn)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g(i)));
      }
      ++done;
      ++points;
    }
  }
  r.passed = worst <= 1e-6;
  r.measured = {{"models", models.size()}, {"points", points},
                {"max_abs_error", worst}, {"tolerance", 1e-6}};
  return r;
}

CriterionResult ac_poincare(const VerifyOptions& opt) {
  CriterionResult r;
  const Domain d = unit_box(5);
  const Eigen::MatrixXd X = lhs_design(400, 5, d, opt.seed);
  const auto model =
      fit(X, sample_response(X, [](const Eigen::VectorXd& x) {
            return fixtures::piston(x, 90000.0, 284.0);
          }),
          d, {}, "piston1")
          .model;
  double full_max = 0.0;
  long long comparisons = 0, violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  Rng rng = Rng::stream(opt.seed, 77);
  auto normal = [&] {
    return std::sqrt(-2.0 * std::log(rng.uniform())) * std::cos(2 * M_PI * rng.uniform());
  };
  for (const InputPrior& prior : {InputPrior::uniform_box(5),
                                  InputPrior(std::vector<Marginal>{
                                      Marginal(Normal{0.5, 0.2}), Marginal(Uniform{0, 1}),
                                      Marginal(Normal{0.5, 0.1, 0, 1}),
                                      Marginal(Uniform{0.2, 0.9}),
                                      Marginal(Normal{0.3, 0.4})})}) {
    const Eigen::MatrixXd sigma = prior.covariance();
    const Eigen::MatrixXd C = canonical_transform(cmat(model, model, prior).entries, sigma);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    const double scale = C.trace();
    full_max = std::max(full_max, std::abs(poincare_bound(C, I, I)) / scale);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    for (int rank = 1; rank < 5; ++rank) {
      const Eigen::MatrixXd W = es.eigenvectors().rightCols(rank);
      const double best = poincare_bound(C, I, W);
      for (int t = 0; t < 100; ++t) {
        Eigen::MatrixXd B(5, rank);
        for (int i = 0; i < B.size(); ++i) B.data()[i] = normal();
        const double other = poincare_bound(C, I, B);
        worst_margin = std::min(worst_margin, (other - best) / scale);
        ++comparisons;
        if (best > other + 1e-12 * scale) ++violations;
      }
    }
  }
  r.passed = full_max <= 1e-10 && violations == 0;
  r.measured = {{"full_basis_bound", full_max},
                {"comparisons", comparisons},
                {"violations", violations},
                {"min_relative_margin", worst_margin}};
  return r;
}

CriterionResult ac_cluster(const VerifyOptions& opt) {
  CriterionResult r;
  const double betas[] = {0.25, 0.5, 4.0};
  const Domain d = unit_box(2);
  std::vector<Ensemble> ensembles;
  for (int k = 0; k < 3; ++k) {
    const Eigen::MatrixXd X = lhs_design(300, 2, d, opt.seed + k);
    const double beta = betas[k];
    const Eigen::VectorXd y = sample_response(
        X, [beta](const Eigen::VectorXd& x) { return fixtures::poly(x, beta); });
    FitConfig cfg;
    cfg.max_terms = 25;
    ensembles.push_back(fit_ensemble(X, y, d, cfg, 5, opt.seed + 100 + k,
                                     "beta=" + std::to_string(beta), opt.threads));
  }
  const auto grid = pairwise_concordance(ensembles, InputPrior::uniform_box(2),
                                         GridMode::full, opt.threads);
  const auto dm = discordance_matrix(grid);
  const auto emb = mds_embed(dm.D, 2, opt.seed);
  std::vector<int> membership;
  for (int m : dm.members) membership.push_back(grid.membership[m]);
  const Eigen::MatrixXd centers = model_centers(emb.points, membership, 3);
  auto dist = [&](int a, int b) { return (centers.row(a) - centers.row(b)).norm(); };
  double spread4 = 0.0;
  for (std::size_t i = 0; i < membership.size(); ++i) {
    if (membership[i] == 2) spread4 = std::max(spread4, (emb.points.row(i) - centers.row(2)).norm());
  }
  const double near = dist(0, 1), far = std::min(dist(0, 2), dist(1, 2));
  bool monotone = true;
  for (std::size_t i = 1; i < emb.stress_history.size(); ++i) {
    monotone = monotone && emb.stress_history[i] <= emb.stress_history[i - 1];
  }
  r.passed = near < far && spread4 < far && monotone;
  r.measured = {{"center_distance_0.25_0.5", near},
                {"min_center_distance_to_4", far},
                {"max_spread_beta4", spread4},
                {"stress", emb.stress},
                {"iterations", emb.iterations},
                {"stress_monotone", monotone},
                {"block_means", {grid.block(0, 1).mean, grid.block(0, 2).mean,
                                 grid.block(1, 2).mean}}};
  return r;
}

}  // namespace

const std::vector<std::string>& criteria() { return kNames; }

CriterionResult run_one(int id, const VerifyOptions& opt) {
  using Fn = CriterionResult (*)(const VerifyOptions&);
  static const Fn table[] = {ac_poly,     ac_surrogate, ac_direction, ac_piston,
                             ac_metric,   ac_identities, ac_quadrature, ac_gradient,
                             ac_poincare, ac_cluster};
  if (id < 1 || id > 10) throw std::invalid_argument("unknown criterion id");
  const auto start = Clock::now();
  CriterionResult r = table[id - 1](opt);
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  r.id = id;
  r.name = kNames[id - 1];
  r.budget_seconds = kBudget[id - 1];
  if (r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  return r;
}

std::vector<CriterionResult> run(const std::string& which, const VerifyOptions& opt) {
  std::vector<CriterionResult> out;
  if (which == "all") {
    for (int id = 1; id <= 10; ++id) out.push_back(run_one(id, opt));
    return out;
  }
  const auto it = std::find(kNames.begin(), kNames.end(), which);
  if (it == kNames.end()) throw std::invalid_argument("unknown fixture: " + which);
  out.push_back(run_one(static_cast<int>(it - kNames.begin()) + 1, opt));
  return out;
}

json to_json(const CriterionResult& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"passed", r.passed},
          {"detail", r.detail},
          {"measured", r.measured},
          {"seconds", r.seconds},
          {"budget_seconds", r.budget_seconds}};
}

}  // namespace coas::verify
