#include "fexprobe/error.hpp"

namespace fexprobe {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::CorruptDump: return "CorruptDump";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::InvalidLabels: return "InvalidLabels";
    case ErrorCode::InvalidLayerTable: return "InvalidLayerTable";
    case ErrorCode::DegenerateTask: return "DegenerateTask";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::InvalidSelection: return "InvalidSelection";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::InvalidThresholds: return "InvalidThresholds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CorruptDump:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::CorruptFile:
    case ErrorCode::InvalidLabels:
    case ErrorCode::InvalidLayerTable:
      return ErrorCategory::InputFormat;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Precondition;
  }
}

int exit_code_for(ErrorCode code) noexcept {
  switch (error_category(code)) {
    case ErrorCategory::InputFormat: return 2;
    case ErrorCategory::Precondition: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 1;
}

}  // namespace fexprobe
