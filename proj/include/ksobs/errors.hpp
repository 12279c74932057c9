#pragma once

#include <stdexcept>

namespace ksobs {

// Exit-code taxonomy used by the CLI: assumption violations map to 2,
// infeasibility (no admissible T or sigma) to 3, numeric failures to 4.

class DesignError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FeasibilityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ksobs
