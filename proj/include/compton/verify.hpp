#pragma once

#include <string>
#include <vector>

namespace compton {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;  // 0: no runtime limit
};

inline constexpr int kCriterionCount = 12;

/// Runs one acceptance criterion (1..12). Never throws; errors become failures.
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance();

std::string format_result_line(const CriterionResult& r);

}  // namespace compton
