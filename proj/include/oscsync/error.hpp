#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oscsync {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad index, size mismatch, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The network has no spanning root, so no consensus direction exists.
class DisconnectedNetwork : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, double time)
      : Error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed scenario configuration. `line()` is 0 when the problem is not
/// tied to a single line (e.g. a missing section).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace oscsync
