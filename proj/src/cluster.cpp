#include "coas/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "coas/analysis.hpp"
#include "coas/closedform.hpp"
#include "coas/error.hpp"
#include "coas/random.hpp"

namespace coas {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
void parallel_for(long long n, int threads, F&& body) {
  threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, n)));
  if (threads == 1) {
    for (long long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long long> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (long long i = next++; i < n; i = next++) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void summarize(ConcordanceSummary& s) {
  const auto n = s.samples.size();
  if (n == 0) {
    s.mean = kNaN;
    s.sd = kNaN;
    return;
  }
  s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.samples) ss += (v - s.mean) * (v - s.mean);
  s.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

// Pool-adjacent-violators: least-squares nondecreasing fit of y.
std::vector<double> pava(const std::vector<double>& y) {
  std::vector<double> level;
  std::vector<int> width;
  for (double v : y) {
    level.push_back(v);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const int w = width.back() + width[width.size() - 2];
      const double m = (level.back() * width.back() +
                        level[level.size() - 2] * width[width.size() - 2]) /
                       w;
      level.pop_back();
      width.pop_back();
      level.back() = m;
      width.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t b = 0; b < level.size(); ++b) out.insert(out.end(), width[b], level[b]);
  return out;
}

struct PairList {
  std::vector<int> i, j;
  std::vector<double> dissim;
};

PairList upper_pairs(const Eigen::MatrixXd& D) {
  PairList pl;
  const auto n = D.rows();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      pl.i.push_back(static_cast<int>(a));
      pl.j.push_back(static_cast<int>(b));
      pl.dissim.push_back(D(a, b));
    }
  }
  return pl;
}

// Disparities (monotone in D, primary treatment of ties) and stress-1.
double stress_and_disparities(const PairList& pl, const Eigen::MatrixXd& X,
                              std::vector<double>* disparities) {
  const std::size_t m = pl.i.size();
  std::vector<double> d(m);
  for (std::size_t k = 0; k < m; ++k) d[k] = (X.row(pl.i[k]) - X.row(pl.j[k])).norm();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pl.dissim[a] != pl.dissim[b]) return pl.dissim[a] < pl.dissim[b];
    return d[a] < d[b];
  });
  std::vector<double> seq(m);
  for (std::size_t k = 0; k < m; ++k) seq[k] = d[order[k]];
  const std::vector<double> fitted = pava(seq);
  double num = 0.0, den = 0.0;
  std::vector<double> dhat(m);
  for (std::size_t k = 0; k < m; ++k) {
    dhat[order[k]] = fitted[k];
    num += (seq[k] - fitted[k]) * (seq[k] - fitted[k]);
    den += seq[k] * seq[k];
  }
  if (disparities) *disparities = std::move(dhat);
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

Eigen::MatrixXd guttman(const PairList& pl, const Eigen::MatrixXd& X,
                        const std::vector<double>& dhat) {
  const auto n = X.rows();
  Eigen::MatrixXd Bm = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < pl.i.size(); ++k) {
    const double d = (X.row(pl.i[k]) - X.row(pl.j[k])).norm();
    const double b = d > 0.0 ? -dhat[k] / d : 0.0;
    Bm(pl.i[k], pl.j[k]) = b;
    Bm(pl.j[k], pl.i[k]) = b;
  }
  for (Eigen::Index a = 0; a < n; ++a) Bm(a, a) = -Bm.row(a).sum();
  return Bm * X / static_cast<double>(n);
}

Eigen::MatrixXd torgerson(const Eigen::MatrixXd& D, int dims) {
  const auto n = D.rows();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd Bm = -0.5 * J * D.cwiseProduct(D) * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bm);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, dims);
  for (int c = 0; c < dims && c < n; ++c) {
    const Eigen::Index idx = n - 1 - c;  // eigenvalues ascend
    const double lam = es.eigenvalues()(idx);
    if (lam > 0.0) X.col(c) = es.eigenvectors().col(idx) * std::sqrt(lam);
  }
  return X;
}

}  // namespace

ConcordanceGrid pairwise_concordance(const std::vector<Ensemble>& ensembles,
                                     const InputPrior& prior, GridMode mode,
                                     int threads) {
  if (ensembles.empty()) throw std::invalid_argument("pairwise_concordance: no models");
  ConcordanceGrid grid;
  grid.mode = mode;
  std::vector<const MarsSurrogate*> members;
  for (std::size_t k = 0; k < ensembles.size(); ++k) {
    const auto& e = ensembles[k];
    if (e.p() != prior.p() || e.domain() != ensembles.front().domain()) {
      throw DimensionError("pairwise_concordance: models have mixed dimensions (" +
                           e.label() + ")");
    }
    grid.labels.push_back(e.label());
    for (std::size_t b = 0; b < e.size(); ++b) {
      members.push_back(&e.members()[b]);
      grid.membership.push_back(static_cast<int>(k));
      grid.member_labels.push_back(e.label() + "#" + std::to_string(b));
    }
  }
  const auto N = static_cast<long long>(members.size());

  std::vector<double> self(N);
  parallel_for(N, threads, [&](long long a) {
    self[a] = cotrace(*members[a], *members[a], prior);
  });
  std::vector<bool> usable(N);
  for (long long a = 0; a < N; ++a) {
    usable[a] = self[a] > 1e-12;
    if (!usable[a]) grid.excluded.push_back(static_cast<int>(a));
  }

  std::vector<std::pair<int, int>> pairs;
  for (long long a = 0; a < N; ++a) {
    for (long long b = a + 1; b < N; ++b) {
      if (usable[a] && usable[b]) pairs.emplace_back(a, b);
    }
  }
  grid.kappa = Eigen::MatrixXd::Constant(N, N, kNaN);
  for (long long a = 0; a < N; ++a) {
    if (usable[a]) grid.kappa(a, a) = 1.0;
  }
  parallel_for(static_cast<long long>(pairs.size()), threads, [&](long long idx) {
    const auto [a, b] = pairs[idx];
    const double tab = mode == GridMode::trace_only
                           ? cotrace(*members[a], *members[b], prior)
                           : cmat(*members[a], *members[b], prior).trace;
    const double k = concordance(tab, self[a], self[b]);
    grid.kappa(a, b) = k;
    grid.kappa(b, a) = k;
  });
  grid.pair_count = static_cast<long long>(pairs.size());

  const int K = static_cast<int>(ensembles.size());
  grid.blocks.resize(static_cast<std::size_t>(K) * K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      auto& s = grid.blocks[static_cast<std::size_t>(k) * K + l];
      s.label_k = grid.labels[k];
      s.label_l = grid.labels[l];
      for (long long a = 0; a < N; ++a) {
        if (grid.membership[a] != k || !usable[a]) continue;
        for (long long b = 0; b < N; ++b) {
          if (grid.membership[b] != l || !usable[b]) continue;
          s.samples.push_back(grid.kappa(a, b));
          if (a == b) ++s.self_pairs;
        }
      }
      summarize(s);
    }
  }
  return grid;
}

DiscordanceMatrix discordance_matrix(const ConcordanceGrid& grid) {
  DiscordanceMatrix out;
  const auto N = grid.kappa.rows();
  for (Eigen::Index a = 0; a < N; ++a) {
    if (!std::isnan(grid.kappa(a, a))) out.members.push_back(static_cast<int>(a));
  }
  const auto n = static_cast<Eigen::Index>(out.members.size());
  out.D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double k = grid.kappa(out.members[a], out.members[b]);
      if (std::isnan(k)) throw std::invalid_argument("discordance_matrix: incomplete grid");
      out.D(a, b) = out.D(b, a) = discordance(k);
    }
  }
  return out;
}

double kruskal_stress(const Eigen::MatrixXd& D, const Eigen::MatrixXd& points) {
  return stress_and_disparities(upper_pairs(D), points, nullptr);
}

Embedding mds_embed(const Eigen::MatrixXd& D, int dims, std::uint64_t seed,
                    int max_iter, double tol) {
  const auto n = D.rows();
  if (D.cols() != n) throw DimensionError("mds_embed: D must be square");
  if (n < 3) throw std::invalid_argument("mds_embed: need at least 3 objects");
  if (dims < 1) throw std::invalid_argument("mds_embed: dims must be >= 1");
  for (Eigen::Index a = 0; a < n; ++a) {
    if (D(a, a) != 0.0) throw std::invalid_argument("mds_embed: nonzero diagonal");
    for (Eigen::Index b = 0; b < n; ++b) {
      if (!(D(a, b) >= 0.0) || std::abs(D(a, b) - D(b, a)) > 1e-12) {
        throw std::invalid_argument("mds_embed: D must be symmetric and non-negative");
      }
    }
  }
  const PairList pl = upper_pairs(D);
  Embedding out;
  Eigen::MatrixXd X = torgerson(D, dims);
  const bool collapsed = (X.rowwise() - X.row(0)).squaredNorm() == 0.0;
  if (collapsed && D.maxCoeff() > 0.0) {
    Rng rng(seed);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (int c = 0; c < dims; ++c) X(a, c) = 1e-3 * (rng.uniform() - 0.5);
    }
  }
  std::vector<double> dhat;
  double stress = stress_and_disparities(pl, X, &dhat);
  out.stress_history.push_back(stress);
  for (int it = 0; it < max_iter && stress > 0.0; ++it) {
    const Eigen::MatrixXd target = guttman(pl, X, dhat);
    Eigen::MatrixXd step = target - X;
    Eigen::MatrixXd next;
    std::vector<double> next_dhat;
    double next_stress = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= 20; ++halving) {
      next = X + step;
      next_stress = stress_and_disparities(pl, next, &next_dhat);
      if (next_stress <= stress) break;
      step *= 0.5;
    }
    if (!(next_stress <= stress)) break;
    const double gain = stress - next_stress;
    X = std::move(next);
    dhat = std::move(next_dhat);
    stress = next_stress;
    out.stress_history.push_back(stress);
    ++out.iterations;
    if (gain < tol) break;
  }
  out.points = std::move(X);
  out.stress = stress;
  return out;
}

Eigen::MatrixXd model_centers(const Eigen::MatrixXd& points,
                              const std::vector<int>& membership, int K) {
  if (static_cast<Eigen::Index>(membership.size()) != points.rows()) {
    throw DimensionError("model_centers: membership length differs from point count");
  }
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(K, points.cols());
  std::vector<int> counts(K, 0);
  for (std::size_t i = 0; i < membership.size(); ++i) {
    const int k = membership[i];
    if (k < 0 || k >= K) throw std::invalid_argument("model_centers: bad model index");
    centers.row(k) += points.row(i);
    ++counts[k];
  }
  for (int k = 0; k < K; ++k) {
    if (counts[k] == 0) {
      throw std::invalid_argument("model_centers: model " + std::to_string(k) +
                                  " has no points");
    }
    centers.row(k) /= counts[k];
  }
  return centers;
}

}  // namespace coas
