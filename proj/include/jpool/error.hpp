#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jpool {

// One error taxonomy for the whole library; the C layer maps these to status
// codes, everything inside throws.
enum class Errc {
  invalid_argument = 1,
  dimension_mismatch,
  size_mismatch,
  io_failure,
  parse_failure,
  domain_violation,
  verification_failure,
  degenerate_input,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, Errc code, const std::string& message) {
  if (!cond) raise(code, message);
}

}  // namespace jpool
