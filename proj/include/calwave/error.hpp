#pragma once

#include <stdexcept>
#include <string>

namespace calwave {

enum class ErrorKind {
  invalid_configuration,
  invalid_parameter,
  unsupported_order,
  unsupported_dimension,
  degenerate,
  tangency_violation,
  stability_refused,
  divergence,
  transport_instability,
  orientation_mismatch,
  inadmissible,
  too_short,
  io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. `key()` names the offending
/// parameter or relation when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string key = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        key_(std::move(key)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ErrorKind kind_;
  std::string key_;
};

/// Raised by multi-step integrators; records how far the run got.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, int last_good_level)
      : Error(ErrorKind::divergence, message), last_good_level_(last_good_level) {}
  int last_good_level() const noexcept { return last_good_level_; }

 private:
  int last_good_level_;
};

}  // namespace calwave
