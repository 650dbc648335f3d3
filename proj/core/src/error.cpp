#include "sortgraph/error.hpp"

namespace sortgraph {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::already_deleted: return "already_deleted";
    case ErrorCode::not_visible: return "not_visible";
    case ErrorCode::vertex_deleted: return "vertex_deleted";
    case ErrorCode::zero_weight: return "zero_weight";
    case ErrorCode::snapshot_too_old: return "snapshot_too_old";
    case ErrorCode::double_release: return "double_release";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::allocation_failure: return "allocation_failure";
  }
  return "unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sortgraph
