#include "llmscape/error.hpp"

namespace llmscape {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::rejected_edit: return "rejected_edit";
    case Errc::input_error: return "input_error";
    case Errc::configuration_error: return "configuration_error";
    case Errc::validation_error: return "validation_error";
    case Errc::precondition_violation: return "precondition_violation";
    case Errc::backend_error: return "backend_error";
    case Errc::parse_error: return "parse_error";
    case Errc::plan_rejected: return "plan_rejected";
    case Errc::log_rejected: return "log_rejected";
    case Errc::summary_error: return "summary_error";
    case Errc::replay_divergence: return "replay_divergence";
    case Errc::unavailable: return "unavailable";
  }
  return "unknown";
}

}  // namespace llmscape
