#include "ews/error.hpp"

namespace ews {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "configuration";
    case ErrorCode::kDependency: return "staged-dependency";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kEncoding: return "encoding";
    case ErrorCode::kIo: return "I/O";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kType: return "type";
    case ErrorCode::kObjective: return "objective";
    case ErrorCode::kCalibration: return "calibration";
    case ErrorCode::kUndefinedMetric: return "undefined-metric";
    case ErrorCode::kModelIntegrity: return "model-integrity";
  }
  return "unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return 2;
    case ErrorCode::kDependency:
      return 3;
    case ErrorCode::kSchema:
    case ErrorCode::kParse:
    case ErrorCode::kIntegrity:
    case ErrorCode::kEncoding:
    case ErrorCode::kIo:
      return 4;
    default:
      return 5;
  }
}

}  // namespace ews
