#pragma once

#include <stdexcept>
#include <string>

namespace ufg {

enum class ErrorCode {
  Io = 1,
  Parse = 2,
  Config = 3,
  Data = 4,
  Dimension = 5,
  Runtime = 6,
  InvalidArg = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_dim(const std::string& msg) {
  throw Error(ErrorCode::Dimension, msg);
}
[[noreturn]] inline void throw_parse(const std::string& msg) {
  throw Error(ErrorCode::Parse, msg);
}
[[noreturn]] inline void throw_data(const std::string& msg) {
  throw Error(ErrorCode::Data, msg);
}
[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorCode::Config, msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorCode::Io, msg);
}
[[noreturn]] inline void throw_runtime(const std::string& msg) {
  throw Error(ErrorCode::Runtime, msg);
}

}  // namespace ufg
