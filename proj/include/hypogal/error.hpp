#pragma once

#include <stdexcept>
#include <string>

namespace hypogal {

enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch,
  kSingular,
  kNotConverged,
  kResidual,
  kAssembly,
  kIo,
  kCacheCorrupt,
  kOutOfMemory,
  kNonFinite,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hypogal
