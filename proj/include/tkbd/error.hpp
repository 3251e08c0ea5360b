#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tkbd {

enum class ErrorCode {
  invalid_geometry,
  invalid_argument,
  unsupported_batch_length,
  dimension_mismatch,
  singular_fit,
  insufficient_data,
  invalid_order,
  unstable_model,
  numerical_domain,
  not_positive_definite,
  undefined_bearing,
  unsupported,
  io,
  format,
  config,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; the code is what the
// CLI prints on its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tkbd
