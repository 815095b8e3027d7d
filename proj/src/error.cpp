#include "fairaudit/error.hpp"

#include <fmt/format.h>

namespace fairaudit {

Error::Error(ErrorKind kind, std::string_view module, std::string_view message)
    : std::runtime_error(fmt::format("{}: {}", module, message)),
      kind_(kind),
      module_(module) {}

void throw_usage(std::string_view module, std::string_view message) {
  throw Error(ErrorKind::kUsage, module, message);
}

void throw_data(std::string_view module, std::string_view message) {
  throw Error(ErrorKind::kData, module, message);
}

void throw_numerical(std::string_view module, std::string_view message) {
  throw Error(ErrorKind::kNumerical, module, message);
}

}  // namespace fairaudit
