#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace coas::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::json measured;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Names accepted by run(): "all" or one of criteria().
const std::vector<std::string>& criteria();

std::vector<CriterionResult> run(const std::string& which,
                                 const VerifyOptions& opt = {});

CriterionResult run_one(int id, const VerifyOptions& opt = {});

nlohmann::json to_json(const CriterionResult& r);

}  // namespace coas::verify
