#include "rsb/error.hpp"

namespace rsb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void throw_invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }
void throw_resource(const std::string& what) { throw Error(ErrorKind::ResourceLimit, what); }
void throw_coverage(const std::string& what) { throw Error(ErrorKind::Coverage, what); }
void throw_internal(const std::string& what) { throw Error(ErrorKind::Internal, what); }

}  // namespace rsb
