#pragma once

#include <stdexcept>
#include <string>

namespace sheafid {

enum class ErrorKind {
  structure,   // malformed sheaf or shape mismatch
  parameter,   // out-of-domain model parameter (e.g. epsilon <= 0)
  usage,       // operation called on unsuitable input
  divergence,  // non-finite state during integration
  config,      // invalid configuration file or combination
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace sheafid
