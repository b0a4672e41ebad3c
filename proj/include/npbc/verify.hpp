#pragma once

#include <string>
#include <vector>

namespace npbc {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// End-to-end verification battery.  `filter` is a substring match on check
// names ("" runs everything); `workers` bounds simulation parallelism.
std::vector<CheckResult> run_verification(const std::string& filter = "",
                                          int workers = 0);

}  // namespace npbc
