#include <iostream>

#include "compton/parallel.hpp"
#include "compton/verify.hpp"

int main() {
  compton::configure_threads_from_env();
  int failed = 0;
  for (int id = 1; id <= compton::kCriterionCount; ++id) {
    const compton::CriterionResult r = compton::run_criterion(id);
    std::cout << compton::format_result_line(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (compton::kCriterionCount - failed) << "/" << compton::kCriterionCount << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
