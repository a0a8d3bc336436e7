#pragma once

#include <stdexcept>
#include <string>

namespace oversmooth {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two grid functions (or a function and an operator) live on different grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A positive-order norm was requested for a function whose energy is not
/// captured by the retained spectral modes.
class SpectralTailError : public Error {
 public:
  using Error::Error;
};

/// A regression had too few usable samples.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

/// exp() of the integrated coefficient would leave double range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A parameter-choice rule could not produce a selection.
class SelectionError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration; `field` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace oversmooth
