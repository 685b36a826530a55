#pragma once

#include <stdexcept>
#include <string>

namespace eprqkd {

/// Invalid run or protocol parameters (pair count, fractions, thresholds).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input that violates a documented invariant (unnormalized state, bad distribution).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A protocol step invoked out of order, or on particles the party does not hold.
class ProtocolOrderError : public std::logic_error {
 public:
  explicit ProtocolOrderError(const std::string& what) : std::logic_error(what) {}
};

/// Should never happen; indicates a bug in the simulator.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace eprqkd
