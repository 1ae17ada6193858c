#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qdlab::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  unsigned threads = 1;
  // Called after each check completes (progress reporting).
  std::function<void(const CheckResult&)> on_result;
};

// Cross-oracle and closed-form checks 1-12. Each returns one result; a thrown
// exception inside a check is reported as a failure with its message.
std::vector<CheckResult> run_numeric_checks(const Options& options = {});

// Check 13: reruns the numeric checks and a pair of fixed-step runs and
// compares pass/fail outcomes, details and CSV bytes with a first pass.
CheckResult check_determinism(const std::vector<CheckResult>& first_pass, const Options& options = {});

// All 13 checks in order.
std::vector<CheckResult> run_all(const Options& options = {});

std::string format_table(const std::vector<CheckResult>& results);

}  // namespace qdlab::checks
