#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blocklex {

// Error taxonomy shared by the C API status codes and the CLI exit codes:
// Config = invalid parameters or configuration, Data = unreadable or
// inconsistent input data, Numeric = numeric failure during computation.
enum class ErrorKind { Config = 2, Data = 3, Numeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  [[noreturn]] static void config(std::string message) {
    throw Error(ErrorKind::Config, std::move(message));
  }
  [[noreturn]] static void data(std::string message) {
    throw Error(ErrorKind::Data, std::move(message));
  }
  [[noreturn]] static void numeric(std::string message) {
    throw Error(ErrorKind::Numeric, std::move(message));
  }

 private:
  ErrorKind kind_;
};

}  // namespace blocklex
