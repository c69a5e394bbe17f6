#pragma once

#include <stdexcept>
#include <string>

namespace unmix {

// Stable error identifiers shared by the whole library. Messages carry the
// context (file names, indices, offending values); the code is what callers
// should dispatch on.
enum class errc {
  all_zero,
  grid_mismatch,
  negative_intensity,
  bad_composition,
  dimension_mismatch,
  unobserved_phase,
  zero_pattern,
  degenerate_fit,
  phase_mismatch,
  empty_input,
  phase_dropout,
  parse_error,
  version_mismatch,
  missing_file,
  too_many_phases,
};

const char* errc_name(errc code) noexcept;

// True for errors raised by the fitting/estimation procedures themselves, as
// opposed to malformed or inconsistent input data.
bool is_solver_error(errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message);
  errc code() const noexcept { return code_; }

  /// Message without the code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  errc code_;
  std::string message_;
};

[[noreturn]] void raise(errc code, const std::string& message);

}  // namespace unmix
