#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vm {

// Library-wide exception. Every failure carries a stable machine-readable
// code (e.g. "NotIrreducible", "BadIndex") plus a human-readable message;
// the CLI maps any vm::Error to exit code 2.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& what) {
  throw Error(std::move(code), what);
}

inline void require(bool ok, const char* code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace vm
