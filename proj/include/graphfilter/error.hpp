#pragma once

#include <stdexcept>
#include <string>

namespace graphfilter {

// Failure categories. The CLI maps each one onto a distinct exit code.
enum class ErrorKind {
  config,           // invalid options or option combinations
  input,            // unreadable or malformed dataset / sidecar files
  missing_quality,  // a quality-consuming step lacks a score for some instance
  write,            // output could not be written
  domain,           // a precondition on numeric or graph arguments was violated
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config error";
    case ErrorKind::input: return "input error";
    case ErrorKind::missing_quality: return "missing quality records";
    case ErrorKind::write: return "write failure";
    case ErrorKind::domain: return "domain error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace graphfilter
