#pragma once

#include <stdexcept>
#include <string>

namespace npamp {

enum class ErrorKind {
  invalid_argument,
  truncation,
  post_selection,
  quadrature,
  mass_deficit,
  numerical,
  config,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace npamp
