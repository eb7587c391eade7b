#include "maclab/error.hpp"

namespace maclab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::too_few_rows: return "too-few-rows";
    case ErrorCode::uninformative_target: return "uninformative-target";
    case ErrorCode::tuning_failed: return "tuning-failed";
    case ErrorCode::training_diverged: return "training-diverged";
    case ErrorCode::factorization_failed: return "factorization-failed";
    case ErrorCode::calibration_failed: return "calibration-failed";
    case ErrorCode::degenerate_statistic: return "degenerate-statistic";
    case ErrorCode::fetch_failed: return "fetch-failed";
    case ErrorCode::corrupt_cache: return "corrupt-cache";
    case ErrorCode::bad_format: return "bad-format";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown-error";
}

}  // namespace maclab
