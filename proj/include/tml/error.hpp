#pragma once

#include <stdexcept>
#include <string>

namespace tml {

/// Broad failure category; the CLI maps these onto its exit codes.
enum class ErrorKind { Usage, Io, Validation };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& what) {
  throw Error(ErrorKind::Validation, what);
}

[[noreturn]] inline void fail_io(const std::string& what) { throw Error(ErrorKind::Io, what); }

}  // namespace tml
