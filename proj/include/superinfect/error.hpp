#pragma once

#include <stdexcept>
#include <string>

namespace superinfect {

/// Bad user input: out-of-range parameters, malformed config, bad node index.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine could not deliver its stated accuracy
/// (non-convergence, bracket failure, cancellation).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace superinfect
