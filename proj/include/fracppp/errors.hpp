#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracppp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operation requested on a fixed point that does not exist for the given parameters.
class NotExistingError : public Error {
public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Orbit left the finite region; carries the step at which it happened.
class DivergedError : public Error {
public:
  explicit DivergedError(std::size_t step)
      : Error("orbit diverged at step " + std::to_string(step)), step_(step) {}

  [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

}  // namespace fracppp
