#pragma once

#include <stdexcept>
#include <string>

namespace npbc {

// Configuration that is syntactically valid but outside the feasible set of a
// condition (e.g. a gain pair violating admissibility).  The CLI maps this to
// exit code 2, everything else to 1.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Three-way outcome of an analytic stability condition.
enum class Verdict { Holds, Fails, Infeasible };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    default: return "infeasible";
  }
}

}  // namespace npbc
