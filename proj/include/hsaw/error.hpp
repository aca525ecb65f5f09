#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsaw {

/// Failure categories. Each maps onto one CLI exit code and one machine-readable
/// error kind.
enum class ErrorKind {
  usage,              // caller violated a precondition
  config,             // invalid experiment configuration
  numeric_integrity,  // a value drifted off the hyperboloid or overflowed
  degenerate_input,   // geometrically undefined request (e.g. log_map(p, p))
  feasibility,        // sampler could not produce a valid walk within budget
  verification,       // a numerical verification suite failed
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::numeric_integrity: return "numeric_integrity";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::feasibility: return "feasibility";
    case ErrorKind::verification: return "verification";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class NumericIntegrityError : public Error {
 public:
  explicit NumericIntegrityError(const std::string& what)
      : Error(ErrorKind::numeric_integrity, what) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what)
      : Error(ErrorKind::degenerate_input, what) {}
};

class FeasibilityError : public Error {
 public:
  FeasibilityError(const std::string& what, double acceptance_rate)
      : Error(ErrorKind::feasibility, what), acceptance_rate_(acceptance_rate) {}
  /// Measured (or bounded) acceptance rate at the time of failure.
  double acceptance_rate() const noexcept { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what) : Error(ErrorKind::verification, what) {}
};

}  // namespace hsaw
