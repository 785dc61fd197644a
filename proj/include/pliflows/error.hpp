#pragma once

#include <stdexcept>
#include <string>

namespace pliflows {

enum class Errc {
  singular_system,
  not_stabilizing,
  no_stabilizing_gain,
  not_converged,
  left_domain,
  out_of_domain,
  dimension_mismatch,
  empty_sample,
  degenerate,
  not_factored,
  precondition_violated,
  invalid_argument,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pliflows
