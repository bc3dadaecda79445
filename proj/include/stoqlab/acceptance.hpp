#pragma once

#include <string>
#include <vector>

namespace stoqlab::acceptance {

enum class Mode { kFast, kFull };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double ms = 0.0;
};

// Runs the acceptance criteria. Full mode uses the pinned sample counts and
// tolerances; fast mode shrinks the Monte Carlo sample counts (the 3-sigma
// style bounds scale with them) to fit an interactive budget.
std::vector<CriterionResult> run_all(Mode mode);

}  // namespace stoqlab::acceptance
