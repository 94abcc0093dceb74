// Error categories aligned with the CLI exit codes:
// config_error -> 1, parse_error -> 2, invariant_error -> 3.
#pragma once

#include <stdexcept>
#include <string>

namespace skm {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an internal consistency check fails (e.g. two algorithms that
// must produce identical assignments disagree). Always a bug, never user input.
struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace skm
