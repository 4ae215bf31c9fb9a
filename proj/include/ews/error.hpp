#pragma once

#include <stdexcept>
#include <string>

namespace ews {

// Every failure raised by the library carries one of these codes. The CLI
// maps them onto process exit statuses via exit_status().
enum class ErrorCode {
  kConfig,            // invalid configuration or split spec
  kDependency,        // a staged input artifact is missing
  kSchema,            // missing/unknown columns
  kParse,             // unparseable cell or document
  kIntegrity,         // duplicate keys, unbalanced panel
  kEncoding,          // unknown categorical label
  kIo,                // unreadable/unwritable path
  kDomain,            // empty input, out-of-range value
  kShape,             // dimension mismatch
  kType,              // categorical column used numerically
  kObjective,         // target arity does not match objective
  kCalibration,       // single-class calibration data
  kUndefinedMetric,   // metric undefined for the given labels
  kModelIntegrity,    // malformed model (zero cover, bad child index)
};

const char* error_code_name(ErrorCode code);

// 0 success, 2 config, 3 staged dependency, 4 data integrity, 5 numeric/model.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + " error: " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ews
