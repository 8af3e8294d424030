#pragma once

#include <stdexcept>
#include <string>

namespace searn {

enum class ErrorKind {
  parameter,      // argument outside its documented domain
  state,          // illegal action or malformed search state
  data,           // malformed or inconsistent input data
  config,         // incompatible or missing configuration
  task_contract,  // a task plugin violated its declared contract
  training,       // learning produced no usable policy
  optimizer,      // numerical failure inside an optimizer
  io,             // file system failure
  internal,       // broken invariant
};

const char* error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace searn
