#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace lcft {

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  int workers = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;     // one line, deterministic
  nlohmann::json metrics;  // deterministic numbers only
};

constexpr int kNumCriteria = 14;

// Criteria 1-13 evaluate library behaviour directly. Criterion 14 re-runs
// a cheap subset twice in process and compares the serialized reports; the
// CLI-level byte comparison lives in the test suite.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, const std::vector<int>& ids = {});

nlohmann::json acceptance_report(const std::vector<CriterionResult>& results, const AcceptanceOptions& opt);
std::string format_line(const CriterionResult& r);  // "[PASS] 3 degeneracy: ..."

}  // namespace lcft
