#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmeasure::acceptance {

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string id;
  std::string name;
  double time_limit_seconds = 0.0;  // 0: no limit
  /// Returns a short detail string; throws CheckFailure when the criterion fails.
  std::function<std::string()> body;
};

struct CheckOutcome {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit_seconds = 0.0;
};

/// The ten end-to-end acceptance criteria, AC1..AC10.
std::vector<Check> acceptance_checks();

/// Module invariants not already exercised by an acceptance criterion.
std::vector<Check> invariant_checks();

CheckOutcome run_check(const Check& check);

}  // namespace qmeasure::acceptance
