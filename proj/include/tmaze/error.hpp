#pragma once

#include <stdexcept>
#include <string>

namespace tmaze {

enum class ErrorCode {
  kBadLength,
  kUnresolvable,
  kNoSupport,
  kEmptyTraversal,
  kDegenerate,
  kCheckpointCorrupt,
  kConfig,
  kLayout,
  kIo,
  kParse,
  kMissingInput,
  kMixedHash,
};

const char* error_code_name(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tmaze
