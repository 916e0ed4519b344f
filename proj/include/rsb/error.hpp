#pragma once

#include <stdexcept>
#include <string>

namespace rsb {

enum class ErrorKind {
  InvalidArgument,
  ResourceLimit,
  Coverage,
  Internal,
};

const char* to_string(ErrorKind kind);

/// Library error. Every failure path in rsbzeta throws this type; the kind
/// lets the CLI map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_resource(const std::string& what);
[[noreturn]] void throw_coverage(const std::string& what);
[[noreturn]] void throw_internal(const std::string& what);

}  // namespace rsb
