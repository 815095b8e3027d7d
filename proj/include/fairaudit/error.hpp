#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

/// Exception carrying the originating module and an error category.
/// what() returns "<module>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, std::string_view message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] void throw_usage(std::string_view module, std::string_view message);
[[noreturn]] void throw_data(std::string_view module, std::string_view message);
[[noreturn]] void throw_numerical(std::string_view module, std::string_view message);

}  // namespace fairaudit
