#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "coas/closedform.hpp"
#include "coas/model.hpp"
#include "coas/prior.hpp"

namespace coas::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance stamped into every artifact the CLI writes.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
};

json provenance_json(const Provenance& p);
/// 16-hex-digit FNV-1a hash of the canonical dump of `config`.
std::string config_hash(const json& config);

json model_to_json(const MarsSurrogate& m);
MarsSurrogate model_from_json(const json& j);

json prior_to_json(const InputPrior& prior);
InputPrior prior_from_json(const json& j);

/// Box used for fitting: uniform bounds, or truncation bounds of normals
/// (falling back to mean +/- 6 sd on untruncated sides).
Domain prior_domain(const InputPrior& prior);

json matrix_to_json(const CoActiveMatrix& c);
CoActiveMatrix matrix_from_json(const json& j);
json eigen_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd eigen_from_json(const json& j);

/// "%.17g" formatting used for every numeric CSV cell.
std::string fmt17(double v);
/// Rows of comma-separated values with a leading "# coas ..." comment line.
std::string matrix_to_csv(const Eigen::MatrixXd& m, const Provenance& prov);

struct Dataset {
  std::vector<std::string> input_names;
  std::string response_name;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

/// Header row, then numeric rows. The response is the column named
/// `response` (last column when empty); every other column is an input.
Dataset read_csv(const fs::path& path, const std::string& response = {});
Dataset parse_csv(const std::string& text, const std::string& response = {});
std::string dataset_to_csv(const Dataset& d, const Provenance& prov);

json read_json(const fs::path& path);
std::string read_text(const fs::path& path);

/// Writes `text` to `path`; refuses to replace an existing file unless
/// `force`.
void write_text(const fs::path& path, const std::string& text, bool force);
void write_json(const fs::path& path, const json& j, bool force);

MarsSurrogate load_model(const fs::path& path);
/// A directory of member_*.json files (sorted by name) or a single model
/// file, which becomes a one-member ensemble.
Ensemble load_ensemble(const fs::path& path);
void save_ensemble(const fs::path& dir, const Ensemble& e, const Provenance& prov,
                   bool force);

}  // namespace coas::io
