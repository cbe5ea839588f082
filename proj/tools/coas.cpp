#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "coas/analysis.hpp"
#include "coas/closedform.hpp"
#include "coas/cluster.hpp"
#include "coas/error.hpp"
#include "coas/fixtures.hpp"
#include "coas/io.hpp"
#include "coas/model.hpp"
#include "coas/montecarlo.hpp"
#include "coas/verify.hpp"

namespace {

using namespace coas;
using io::json;
namespace fs = std::filesystem;

struct Common {
  std::uint64_t seed = 1;
  int threads = 0;
  bool force = false;
  std::string out;
  std::string prior;
};

int default_threads(int requested, bool parallel_default) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COAS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return parallel_default ? std::max(1u, std::thread::hardware_concurrency()) : 1;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

io::Provenance provenance(const Common& c, const json& config) {
  return {c.seed, io::config_hash(config)};
}

json with_provenance(json j, const io::Provenance& prov) {
  j["provenance"] = io::provenance_json(prov);
  return j;
}

InputPrior load_prior(const std::string& path, const Domain& fallback) {
  if (!path.empty()) return io::prior_from_json(io::read_json(path));
  std::vector<Marginal> dims;
  for (const auto& d : fallback) dims.emplace_back(Uniform{d.lo, d.hi});
  return InputPrior(std::move(dims));
}

// A model argument is either a surrogate file or a builtin fixture URI.
struct Source {
  std::string name;
  std::optional<MarsSurrogate> model;
  std::optional<fixtures::Fixture> fixture;

  const Domain& domain() const { return model ? model->domain() : fixture->domain; }
  std::string label() const {
    if (model && !model->label().empty()) return model->label();
    return name;
  }
  SampledFunction sampled(double rel_step) const {
    if (model) return SampledFunction::from_surrogate(*model);
    return SampledFunction::from_callable(fixture->f, fixture->domain, name, rel_step);
  }
};

Source load_source(const std::string& arg) {
  Source s{arg, std::nullopt, std::nullopt};
  if (fixtures::is_builtin(arg)) {
    s.fixture = fixtures::resolve(arg);
  } else {
    s.model = io::load_model(arg);
    s.name = fs::path(arg).stem().string();
  }
  return s;
}

const MarsSurrogate& require_model(const Source& s) {
  if (!s.model) throw std::invalid_argument(s.name + ": a fitted model file is required here");
  return *s.model;
}

json decomposition_json(const CoActiveDecomposition& dec, const std::string& k,
                        const std::string& l, int q, double tau) {
  json j;
  j["pair"] = {k, l};
  j["concordance"] = dec.concordance;
  j["discordance"] = discordance(dec.concordance);
  j["eigvals"] = std::vector<double>(dec.eigvals.data(), dec.eigvals.data() + dec.p());
  j["contributions"] =
      std::vector<double>(dec.contributions.data(), dec.contributions.data() + dec.p());
  j["eigvecs"] = io::eigen_to_json(dec.eigvecs);
  const int qq = q > 0 ? std::min(q, dec.p()) : dec.p();
  const auto s = activity_scores(dec, qq);
  j["signed_scores"] = std::vector<double>(s.signed_scores.data(), s.signed_scores.data() + dec.p());
  j["unsigned_scores"] =
      std::vector<double>(s.unsigned_scores.data(), s.unsigned_scores.data() + dec.p());
  j["q"] = qq;
  j["t_k"] = dec.t_k;
  j["t_l"] = dec.t_l;
  if (tau > 0.0) {
    const auto sel = select_dim(dec.eigvals, tau);
    j["r_selected"] = sel.r;
    j["max_gap_ratio"] = sel.max_gap_ratio;
    j["gap_index"] = sel.gap_index;
    if (sel.warning) warn("no eigenvalue magnitude reaches tau");
  } else {
    j["r_selected"] = nullptr;
  }
  return j;
}

// Resolves q, including "auto" (chosen by the eigenvalue threshold tau).
int resolve_q(const std::string& q, double tau, const Eigen::VectorXd& eigvals) {
  if (q.empty()) return 0;
  if (q == "auto") {
    if (!(tau > 0.0)) throw std::invalid_argument("--q auto requires --tau");
    return std::max(1, select_dim(eigvals, tau).r);
  }
  const int v = std::stoi(q);
  if (v < 1 || v > eigvals.size()) throw std::invalid_argument("--q must be in [1, p]");
  return v;
}

// Relative activity of each function to the joint co-activity, per input.
std::string ratio_csv(const CoActiveDecomposition& self_k, const CoActiveDecomposition& self_l,
                      const CoActiveDecomposition& joint, int q, const io::Provenance& prov) {
  const int p = joint.p();
  const int qq = q > 0 ? q : p;
  const auto ak = activity_scores(self_k, qq), al = activity_scores(self_l, qq),
             akl = activity_scores(joint, qq);
  std::string out = io::matrix_to_csv(Eigen::MatrixXd(0, 0), prov);
  out += "input,alpha_k_over_alpha_kl,alpha_l_over_alpha_kl\n";
  for (int i = 0; i < p; ++i) {
    out += std::to_string(i) + "," + io::fmt17(ak.signed_scores(i) / akl.signed_scores(i)) +
           "," + io::fmt17(al.signed_scores(i) / akl.signed_scores(i)) + "\n";
  }
  return out;
}

int cmd_fit(const Common& c, const std::string& data, const std::string& response, int n,
            const FitConfig& cfg, int bootstrap, int cv, const std::string& label) {
  const json config = {{"cmd", "fit"}, {"data", data}, {"response", response}, {"n", n},
                       {"max_terms", cfg.max_terms}, {"max_degree", cfg.max_degree},
                       {"bootstrap", bootstrap}, {"cv", cv}, {"seed", c.seed},
                       {"prior", c.prior}};
  const auto prov = provenance(c, config);
  if (data.empty()) throw std::invalid_argument("fit needs a data file, fixture URI or --beta");
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Domain domain;
  if (fixtures::is_builtin(data)) {
    const auto fx = fixtures::resolve(data);
    domain = fx.domain;
    X = lhs_design(n, static_cast<int>(domain.size()), domain, c.seed);
    y.resize(n);
    for (int i = 0; i < n; ++i) y(i) = fx.f(X.row(i).transpose());
  } else {
    auto ds = io::read_csv(data, response);
    X = std::move(ds.X);
    y = std::move(ds.y);
    if (!c.prior.empty()) {
      domain = io::prior_domain(io::prior_from_json(io::read_json(c.prior)));
    } else {
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        domain.push_back({X.col(j).minCoeff(), X.col(j).maxCoeff()});
      }
    }
  }
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  const std::string name = label.empty() ? fs::path(c.out).stem().string() : label;
  json report = {{"n", X.rows()}, {"p", X.cols()}};
  if (bootstrap > 0) {
    const auto ens = fit_ensemble(X, y, domain, cfg, bootstrap, c.seed, name,
                                  default_threads(c.threads, false));
    io::save_ensemble(c.out, ens, prov, c.force);
    std::vector<std::size_t> sizes;
    for (const auto& m : ens.members()) sizes.push_back(m.terms().size());
    report["members"] = ens.size();
    report["terms"] = sizes;
  } else {
    const auto res = fit(X, y, domain, cfg, name);
    if (res.constant_response) warn("response has zero variance; fitted a constant model");
    io::write_json(c.out, with_provenance(io::model_to_json(res.model), prov), c.force);
    report["terms"] = res.model.terms().size();
    report["forward_terms"] = res.forward_terms;
    report["training_rmse"] = res.rmse;
    report["r2"] = res.r2;
    report["gcv"] = res.gcv;
    report["constant_response"] = res.constant_response;
  }
  if (cv > 0) report["cv_rmspe"] = cv_rmspe(X, y, domain, cfg, cv, c.seed);
  std::cout << with_provenance(report, prov).dump(2) << "\n";
  return 0;
}

struct PairOutputs {
  CoActiveMatrix ckl, clk;
  double tk = 0.0, tl = 0.0;
};

PairOutputs pair_matrices(const MarsSurrogate& a, const MarsSurrogate& b,
                          const InputPrior& prior, bool modified) {
  PairOutputs o;
  if (modified) {
    o.ckl = cmat_modified(a, b, prior);
    o.clk = cmat_modified(b, a, prior);
    o.tk = cmat_modified(a, a, prior).trace;
    o.tl = cmat_modified(b, b, prior).trace;
  } else {
    o.ckl = cmat(a, b, prior);
    o.clk = cmat(b, a, prior);
    o.tk = cotrace(a, a, prior);
    o.tl = cotrace(b, b, prior);
  }
  return o;
}

int cmd_cmat(const Common& c, const std::string& a_arg, const std::string& b_arg,
             bool modified, long long mc_b, double h, const std::string& q_arg, double tau) {
  const json config = {{"cmd", "cmat"}, {"a", a_arg}, {"b", b_arg}, {"modified", modified},
                       {"mc", mc_b}, {"h", h}, {"q", q_arg}, {"tau", tau},
                       {"seed", c.seed}, {"prior", c.prior}};
  const auto prov = provenance(c, config);
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  const Source sa = load_source(a_arg), sb = load_source(b_arg);
  const auto& a = require_model(sa);
  const auto& b = require_model(sb);
  const InputPrior prior = load_prior(c.prior, a.domain());
  const auto m = pair_matrices(a, b, prior, modified);
  const fs::path dir = c.out;
  const std::string stem = modified ? "cmat_modified" : "cmat";
  io::write_text(dir / (stem + ".csv"), io::matrix_to_csv(m.ckl.entries, prov), c.force);
  io::write_json(dir / (stem + ".json"), with_provenance(io::matrix_to_json(m.ckl), prov),
                 c.force);
  const Eigen::MatrixXd V = symmetrize(m.ckl.entries, m.clk.entries);
  io::write_text(dir / "V.csv", io::matrix_to_csv(V, prov), c.force);
  const auto dec = decompose(V, m.tk, m.tl);
  const int q = resolve_q(q_arg, tau, dec.eigvals);
  json report = decomposition_json(dec, sa.label(), sb.label(), q, tau);
  report["kind"] = modified ? "modified" : "plain";
  if (mc_b > 0) {
    const auto mc = mc_cmat(sa.sampled(h), sb.sampled(h), prior, mc_b, c.seed,
                            default_threads(c.threads, false));
    Eigen::MatrixXd cf = m.ckl.entries;
    if (modified) cf = cmat(a, b, prior).entries;
    report["mc_frobenius_distance"] = (mc.estimate.entries - cf).norm();
    report["mc_B"] = mc_b;
    json mj = {{"entries", io::eigen_to_json(mc.estimate.entries)},
               {"se_entries", io::eigen_to_json(mc.se)},
               {"B", mc.samples},
               {"seed", mc.seed},
               {"h", mc.h}};
    io::write_json(dir / "mc.json", with_provenance(mj, prov), c.force);
  }
  io::write_json(dir / "analysis.json", with_provenance(report, prov), c.force);
  std::cout << "concordance " << io::fmt17(dec.concordance) << "\n";
  return 0;
}

int cmd_mc(const Common& c, const std::string& a_arg, const std::string& b_arg, long long B,
           double h) {
  const json config = {{"cmd", "mc"}, {"a", a_arg}, {"b", b_arg}, {"B", B}, {"h", h},
                       {"seed", c.seed}, {"prior", c.prior}};
  const auto prov = provenance(c, config);
  const Source sa = load_source(a_arg), sb = load_source(b_arg);
  const InputPrior prior = load_prior(c.prior, sa.domain());
  const auto mc = mc_cmat(sa.sampled(h), sb.sampled(h), prior, B, c.seed,
                          default_threads(c.threads, false));
  const json j = with_provenance({{"entries", io::eigen_to_json(mc.estimate.entries)},
                                  {"se_entries", io::eigen_to_json(mc.se)},
                                  {"B", mc.samples},
                                  {"seed", mc.seed},
                                  {"h", mc.h}},
                                 prov);
  if (c.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(c.out, j, c.force);
  }
  return 0;
}

int cmd_analyze(const Common& c, const std::string& a_arg, const std::string& b_arg,
                bool modified, const std::string& q_arg, double tau) {
  const json config = {{"cmd", "analyze"}, {"a", a_arg}, {"b", b_arg}, {"modified", modified},
                       {"q", q_arg}, {"tau", tau}, {"seed", c.seed}, {"prior", c.prior}};
  const auto prov = provenance(c, config);
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  const Source sa = load_source(a_arg), sb = load_source(b_arg);
  const auto& a = require_model(sa);
  const auto& b = require_model(sb);
  const InputPrior prior = load_prior(c.prior, a.domain());
  const auto m = pair_matrices(a, b, prior, modified);
  const auto joint = decompose(symmetrize(m.ckl.entries, m.clk.entries), m.tk, m.tl);
  const auto selfk = pair_matrices(a, a, prior, modified);
  const auto selfl = pair_matrices(b, b, prior, modified);
  const auto dk = decompose(selfk.ckl.entries, selfk.tk, selfk.tk);
  const auto dl = decompose(selfl.ckl.entries, selfl.tk, selfl.tk);
  const int q = resolve_q(q_arg, tau, joint.eigvals);
  json report = decomposition_json(joint, sa.label(), sb.label(), q, tau);
  report["self_k"] = decomposition_json(dk, sa.label(), sa.label(), q, tau);
  report["self_l"] = decomposition_json(dl, sb.label(), sb.label(), q, tau);
  report["shared_eigvals"] = [&] {
    const Eigen::MatrixXd H = shared_matrix({selfk.ckl, selfl.ckl});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
  }();
  const fs::path dir = c.out;
  io::write_json(dir / "analysis.json", with_provenance(report, prov), c.force);
  io::write_text(dir / "ratios.csv", ratio_csv(dk, dl, joint, q, prov), c.force);
  std::cout << "concordance " << io::fmt17(joint.concordance) << "\n";
  return 0;
}

int cmd_bound(const Common& c, const std::string& model_arg, int rank) {
  const json config = {{"cmd", "bound"}, {"model", model_arg}, {"rank", rank},
                       {"seed", c.seed}, {"prior", c.prior}};
  const auto prov = provenance(c, config);
  const Source s = load_source(model_arg);
  const auto& m = require_model(s);
  const InputPrior prior = load_prior(c.prior, m.domain());
  const Eigen::MatrixXd sigma = prior.covariance();
  const Eigen::MatrixXd C = canonical_transform(cmat(m, m, prior).entries, sigma);
  const int p = m.p();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  json rows = json::array();
  const int lo = rank > 0 ? rank : 0, hi = rank > 0 ? rank : p;
  for (int r = lo; r <= hi; ++r) {
    const Eigen::MatrixXd W = es.eigenvectors().rightCols(r);
    rows.push_back({{"rank", r}, {"bound", poincare_bound(C, I, W)}});
  }
  const json j = with_provenance(
      {{"model", s.label()}, {"coordinates", "canonical"}, {"bounds", rows}}, prov);
  if (c.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(c.out, j, c.force);
  }
  return 0;
}

int cmd_cluster(const Common& c, const std::vector<std::string>& inputs, bool trace_only) {
  const json config = {{"cmd", "cluster"}, {"inputs", inputs}, {"trace_only", trace_only},
                       {"seed", c.seed}, {"prior", c.prior}};
  const auto prov = provenance(c, config);
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  if (inputs.size() < 2) throw std::invalid_argument("cluster needs at least 2 models");
  std::vector<Ensemble> ensembles;
  for (const auto& in : inputs) ensembles.push_back(io::load_ensemble(in));
  const InputPrior prior = load_prior(c.prior, ensembles.front().domain());
  const int threads = default_threads(c.threads, true);
  const auto start = std::chrono::steady_clock::now();
  const auto grid = pairwise_concordance(
      ensembles, prior, trace_only ? GridMode::trace_only : GridMode::full, threads);
  const auto dm = discordance_matrix(grid);
  for (int e : grid.excluded) warn("excluded constant member " + grid.member_labels[e]);
  const auto emb = mds_embed(dm.D, 2, c.seed);
  std::vector<int> membership;
  for (int m : dm.members) membership.push_back(grid.membership[m]);
  const Eigen::MatrixXd centers = model_centers(emb.points, membership, grid.models());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string head = io::matrix_to_csv(Eigen::MatrixXd(0, 0), prov);
  std::string g = head + "model_k,model_l,mean,sd\n";
  for (int k = 0; k < grid.models(); ++k) {
    for (int l = 0; l < grid.models(); ++l) {
      const auto& b = grid.block(k, l);
      g += grid.labels[k] + "," + grid.labels[l] + "," + io::fmt17(b.mean) + "," +
           io::fmt17(b.sd) + "\n";
    }
  }
  std::string s = head + "member_k,member_l,kappa\n";
  const auto N = grid.kappa.rows();
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (std::isnan(grid.kappa(i, j))) continue;
      s += grid.member_labels[i] + "," + grid.member_labels[j] + "," +
           io::fmt17(grid.kappa(i, j)) + "\n";
    }
  }
  std::string e = head + "label,member_index,x,y\n";
  for (std::size_t i = 0; i < dm.members.size(); ++i) {
    e += grid.labels[membership[i]] + "," + std::to_string(dm.members[i]) + "," +
         io::fmt17(emb.points(i, 0)) + "," + io::fmt17(emb.points(i, 1)) + "\n";
  }
  std::string ce = head + "label,cx,cy\n";
  for (int k = 0; k < grid.models(); ++k) {
    ce += grid.labels[k] + "," + io::fmt17(centers(k, 0)) + "," + io::fmt17(centers(k, 1)) +
          "\n";
  }
  const fs::path dir = c.out;
  io::write_text(dir / "grid.csv", g, c.force);
  io::write_text(dir / "samples.csv", s, c.force);
  io::write_text(dir / "embedding.csv", e, c.force);
  io::write_text(dir / "centers.csv", ce, c.force);
  io::write_json(dir / "embedding.json",
                 with_provenance({{"stress", emb.stress},
                                  {"stress_history", emb.stress_history},
                                  {"iterations", emb.iterations},
                                  {"pair_count", grid.pair_count},
                                  {"excluded", grid.excluded},
                                  {"mode", trace_only ? "trace_only" : "full"}},
                                 prov),
                 c.force);
  std::cerr << "pairs " << grid.pair_count << " in " << seconds << " s\n";
  return 0;
}

int cmd_verify(const Common& c, const std::string& which) {
  verify::VerifyOptions opt;
  opt.seed = c.seed;
  opt.threads = default_threads(c.threads, false);
  const auto results = verify::run(which, opt);
  json all = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("AC%-2d %-11s %s  (%.2f s)\n", r.id, r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.seconds);
    all.push_back(verify::to_json(r));
    ok = ok && r.passed;
  }
  const json config = {{"cmd", "verify"}, {"which", which}, {"seed", c.seed}};
  const json report = with_provenance({{"results", all}}, provenance(c, config));
  if (c.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    io::write_json(c.out, report, c.force);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-active subspace analysis of model pairs"};
  app.set_version_flag("--version", std::string(io::kToolVersion));
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* sub, bool prior) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads (default: COAS_THREADS)");
    sub->add_flag("--force", c.force, "Overwrite existing outputs");
    sub->add_option("--out", c.out, "Output path");
    if (prior) sub->add_option("--prior", c.prior, "Prior JSON file");
  };

  std::string data, response, label, a, b, q, which = "all";
  int n = 1000, bootstrap = 0, cv = 0, rank = 0;
  long long mc_b = 0, B = 100000;
  double tau = 0.0, h = 1e-5;
  bool modified = false, trace_only = false;
  FitConfig cfg;
  std::vector<std::string> inputs;

  auto* fit_cmd = app.add_subcommand("fit", "Fit a MARS surrogate or bootstrap ensemble");
  common(fit_cmd, true);
  fit_cmd->add_option("data", data, "CSV file or builtin fixture URI");
  fit_cmd->add_option("--response", response, "Response column name");
  fit_cmd->add_option("--n", n, "Design size for builtin fixtures");
  fit_cmd->add_option("--beta", [&](const CLI::results_t& r) {
    data = "builtin:poly?beta=" + r.front();
    return true;
  }, "Shorthand for builtin:poly?beta=");
  fit_cmd->add_option("--max-terms", cfg.max_terms);
  fit_cmd->add_option("--max-degree", cfg.max_degree);
  fit_cmd->add_option("--penalty", cfg.penalty);
  fit_cmd->add_option("--bootstrap", bootstrap, "Ensemble size B (writes a directory)");
  fit_cmd->add_option("--cv", cv, "K-fold CV RMSPE");
  fit_cmd->add_option("--label", label);

  auto* cmat_cmd = app.add_subcommand("cmat", "Closed-form co-active matrix and analysis");
  common(cmat_cmd, true);
  cmat_cmd->add_option("a", a)->required();
  cmat_cmd->add_option("b", b)->required();
  cmat_cmd->add_flag("--modified", modified, "Use C + Z_k Z_l^T");
  cmat_cmd->add_option("--mc", mc_b, "Also estimate by Monte Carlo with B draws");
  cmat_cmd->add_option("--step", h, "Relative finite-difference step");
  cmat_cmd->add_option("--q", q, "Score truncation (integer or auto)");
  cmat_cmd->add_option("--tau", tau, "Eigenvalue threshold");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo co-active matrix");
  common(mc_cmd, true);
  mc_cmd->add_option("a", a)->required();
  mc_cmd->add_option("b", b)->required();
  mc_cmd->add_option("--B", B, "Number of draws");
  mc_cmd->add_option("--step", h, "Relative finite-difference step");

  auto* an_cmd = app.add_subcommand("analyze", "Decomposition, scores and ratio data");
  common(an_cmd, true);
  an_cmd->add_option("a", a)->required();
  an_cmd->add_option("b", b)->required();
  an_cmd->add_flag("--modified", modified);
  an_cmd->add_option("--q", q);
  an_cmd->add_option("--tau", tau);

  auto* cl_cmd = app.add_subcommand("cluster", "Pairwise concordance grid and MDS embedding");
  common(cl_cmd, true);
  cl_cmd->add_option("models", inputs, "Ensemble directories or model files")->required();
  cl_cmd->add_flag("--trace-only", trace_only, "Compute only matrix traces");

  auto* bd_cmd = app.add_subcommand("bound", "Poincare bound for leading active subspaces");
  common(bd_cmd, true);
  bd_cmd->add_option("model", a)->required();
  bd_cmd->add_option("--rank", rank, "Subspace dimension (default: all)");

  auto* vf_cmd = app.add_subcommand("verify", "Run acceptance checks");
  common(vf_cmd, false);
  vf_cmd->add_option("fixture", which, "all or a criterion name")
      ->check(CLI::IsMember([] {
        auto v = verify::criteria();
        v.push_back("all");
        return v;
      }()));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fit_cmd) return cmd_fit(c, data, response, n, cfg, bootstrap, cv, label);
    if (*cmat_cmd) return cmd_cmat(c, a, b, modified, mc_b, h, q, tau);
    if (*mc_cmd) return cmd_mc(c, a, b, B, h);
    if (*an_cmd) return cmd_analyze(c, a, b, modified, q, tau);
    if (*cl_cmd) return cmd_cluster(c, inputs, trace_only);
    if (*bd_cmd) return cmd_bound(c, a, rank);
    if (*vf_cmd) return cmd_verify(c, which);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
