#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coas/model.hpp"
#include "coas/prior.hpp"

namespace coas {

/// Concordance samples for one (model k, model l) block: one value per
/// member cross pair, including each member paired with itself on
/// diagonal blocks.
struct ConcordanceSummary {
  std::string label_k;
  std::string label_l;
  std::vector<double> samples;
  double mean = 0.0;
  double sd = 0.0;
  /// Diagonal-block pairs of a member with itself (always exactly 1).
  int self_pairs = 0;
};

enum class GridMode { full, trace_only };

struct ConcordanceGrid {
  std::vector<std::string> labels;        // K models
  std::vector<std::string> member_labels; // N members
  std::vector<int> membership;            // member -> model index
  /// N x N member concordances; NaN on rows of excluded members.
  Eigen::MatrixXd kappa;
  std::vector<ConcordanceSummary> blocks;  // K x K, row-major
  /// Members with zero total gradient, left out of every summary.
  std::vector<int> excluded;
  GridMode mode = GridMode::full;
  long long pair_count = 0;

  int models() const { return static_cast<int>(labels.size()); }
  const ConcordanceSummary& block(int k, int l) const {
    return blocks[static_cast<std::size_t>(k) * labels.size() + l];
  }
};

/// All member-pair concordances across K ensembles. In trace-only mode only
/// the diagonals of each C_kl are formed.
ConcordanceGrid pairwise_concordance(const std::vector<Ensemble>& ensembles,
                                     const InputPrior& prior,
                                     GridMode mode = GridMode::full,
                                     int threads = 1);

/// Elementwise sqrt((1 - kappa)/2) over the retained members.
struct DiscordanceMatrix {
  Eigen::MatrixXd D;
  /// Grid member index of each row of D.
  std::vector<int> members;
};

DiscordanceMatrix discordance_matrix(const ConcordanceGrid& grid);

struct Embedding {
  Eigen::MatrixXd points;  // N x dims
  double stress = 0.0;     // Kruskal stress-1
  /// Stress after initialization and after each accepted iteration.
  std::vector<double> stress_history;
  int iterations = 0;
};

/// Kruskal non-metric MDS: classical (Torgerson) start, then Guttman-
/// transform majorization against pool-adjacent-violators disparities.
/// Steps that would raise stress-1 are halved (up to 20 times) and the
/// iteration stops when a step gains less than `tol` or after `max_iter`.
/// The seed only matters if the classical start collapses to one point.
Embedding mds_embed(const Eigen::MatrixXd& D, int dims = 2,
                    std::uint64_t seed = 0, int max_iter = 500,
                    double tol = 1e-8);

/// Kruskal stress-1 of a configuration against dissimilarities D.
double kruskal_stress(const Eigen::MatrixXd& D, const Eigen::MatrixXd& points);

/// Mean point per model; membership[i] in [0, K).
Eigen::MatrixXd model_centers(const Eigen::MatrixXd& points,
                              const std::vector<int>& membership, int K);

}  // namespace coas
