#include "tfim/core.hpp"

namespace tfim {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::cap_breach: return "cap_breach";
    case ErrorKind::schema: return "schema";
    case ErrorKind::solver_failure: return "solver_failure";
    case ErrorKind::chain_instability: return "chain_instability";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::fit_undefined: return "fit_undefined";
    case ErrorKind::structural: return "structural";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

bool Error::numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::solver_failure:
    case ErrorKind::chain_instability:
    case ErrorKind::resonance:
    case ErrorKind::fit_undefined:
    case ErrorKind::structural:
      return true;
    default:
      return false;
  }
}

}  // namespace tfim
