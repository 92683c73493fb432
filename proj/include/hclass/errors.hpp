#ifndef HCLASS_ERRORS_HPP_
#define HCLASS_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace hclass {

// Validation errors map to CLI exit code 2, runtime errors to exit code 3.
enum class ErrorKind { validation, runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message),
        kind_(kind),
        code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_validation(std::string code, const std::string& message) {
  throw Error(ErrorKind::validation, std::move(code), message);
}

[[noreturn]] inline void throw_runtime(std::string code, const std::string& message) {
  throw Error(ErrorKind::runtime, std::move(code), message);
}

}  // namespace hclass

#endif  // HCLASS_ERRORS_HPP_
