// Runs the full verification battery and prints one line per check.
// Exit status is nonzero if any check fails.

#include <cstdio>
#include <string>

#include "npbc/verify.hpp"

int main(int argc, char** argv) {
  std::string filter = argc > 1 ? argv[1] : "";
  auto results = npbc::run_verification(filter);
  bool all_ok = !results.empty();
  for (const auto& r : results) {
    std::printf("[%s] %2d %-24s %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    all_ok = all_ok && r.pass;
  }
  std::printf("%s\n", all_ok ? "ALL CHECKS PASSED" : "CHECKS FAILED");
  return all_ok ? 0 : 1;
}
