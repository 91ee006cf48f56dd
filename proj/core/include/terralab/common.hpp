#pragma once

#include <stdexcept>
#include <string>

namespace terralab {

// Bad or missing configuration, malformed input files, domain violations
// detected before any numerics run. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A solver could not produce a result: shooting bracket does not isolate a
// speed, terrace not yet formed, too few samples for a fit. Exit code 3.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Time integration produced non-finite values. Exit code 4.
struct InstabilityError : std::runtime_error {
  explicit InstabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace terralab
