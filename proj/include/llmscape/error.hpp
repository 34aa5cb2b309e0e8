#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace llmscape {

enum class Errc {
  rejected_edit,
  input_error,
  configuration_error,
  validation_error,
  precondition_violation,
  backend_error,
  parse_error,
  plan_rejected,
  log_rejected,
  summary_error,
  replay_divergence,
  unavailable,
};

std::string_view to_string(Errc code) noexcept;

/// Base of every error the library throws. `code()` is stable and is what
/// ends up in `error` log entries.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace llmscape
