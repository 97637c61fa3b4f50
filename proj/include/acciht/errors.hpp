#pragma once

#include <stdexcept>
#include <string>

namespace acciht {

/// Bad input: wrong shapes, out-of-range parameters, violated preconditions.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not deliver its contract (rank deficiency,
/// complex spectrum, non-finite values).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an external file failed.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

} // namespace detail
} // namespace acciht
