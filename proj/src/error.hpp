#pragma once
#include <stdexcept>
#include <string>

namespace phaseage {

enum class ErrorCode {
  invalid_argument,
  invalid_model,
  singular,
  conditioning,
  unsupported,
  numeric,
  insufficient_acceptance,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace phaseage
