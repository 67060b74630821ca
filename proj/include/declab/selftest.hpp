#pragma once

#include <string>
#include <vector>

namespace declab {

struct SelfCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double expected = 0.0;
  std::string detail;  ///< error message when the check threw
};

/// Closed-form sanity checks across all modules; quick enough for every run.
std::vector<SelfCheck> run_selftest();

}  // namespace declab
