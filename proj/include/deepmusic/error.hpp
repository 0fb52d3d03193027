#pragma once

#include <stdexcept>
#include <string>

namespace dm {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Format,     // wrong magic or malformed header
  Truncated,  // payload ends early
  Version,    // unsupported format version
  Config,     // unknown key or unparsable value
  Internal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace dm
