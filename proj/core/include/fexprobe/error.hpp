#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fexprobe {

enum class ErrorCode {
  EmptySample,
  InvalidDomain,
  GridMismatch,
  InvalidShape,
  LayoutMismatch,
  CorruptDump,
  UnsupportedFormat,
  CorruptFile,
  InvalidLabels,
  InvalidLayerTable,
  DegenerateTask,
  AlignmentError,
  InvalidSelection,
  UnknownClass,
  InvalidThresholds,
  InvalidArgument,
  IoError,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory {
  InputFormat,   // exit 2
  Precondition,  // exit 3
  Io,            // exit 4
};

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fexprobe
