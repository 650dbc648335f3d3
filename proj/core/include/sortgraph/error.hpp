#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sortgraph {

enum class ErrorCode {
  invalid_argument,
  capacity,
  out_of_range,
  not_found,
  already_deleted,
  not_visible,
  vertex_deleted,
  zero_weight,
  snapshot_too_old,
  double_release,
  parse_error,
  infeasible,
  allocation_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a stable code so that the
// command-line harness can emit a machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace sortgraph
