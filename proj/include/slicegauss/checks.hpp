#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace slicegauss::checks {

struct CheckResult {
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  unsigned threads = 1;
};

struct NamedCheck {
  std::string id;
  std::string title;
  std::function<CheckResult(const CheckOptions&)> run;
};

// The twelve acceptance criteria, in order.
std::vector<NamedCheck> acceptance_checks();

// Module invariants (cheaper property checks).
std::vector<NamedCheck> invariant_checks();

// Runs the checks, printing one "PASS"/"FAIL" line per check. Exceptions
// thrown by a check count as failures. Returns the number of failures.
int run_checks(const std::vector<NamedCheck>& list, const CheckOptions& options, std::ostream& out);

}  // namespace slicegauss::checks
