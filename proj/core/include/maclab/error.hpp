#ifndef MACLAB_ERROR_HPP
#define MACLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace maclab {

enum class ErrorCode {
  invalid_config,
  invalid_input,
  too_few_rows,
  uninformative_target,
  tuning_failed,
  training_diverged,
  factorization_failed,
  calibration_failed,
  degenerate_statistic,
  fetch_failed,
  corrupt_cache,
  bad_format,
  io_error,
};

const char* to_string(ErrorCode code);

/// Library-wide exception type; carries a machine-checkable code plus a
/// human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace maclab

#endif  // MACLAB_ERROR_HPP
