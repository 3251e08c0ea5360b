#include "tkbd/error.hpp"

namespace tkbd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_geometry: return "invalid_geometry";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::unsupported_batch_length: return "unsupported_batch_length";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::singular_fit: return "singular_fit";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::invalid_order: return "invalid_order";
    case ErrorCode::unstable_model: return "unstable_model";
    case ErrorCode::numerical_domain: return "numerical_domain";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::undefined_bearing: return "undefined_bearing";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace tkbd
