#pragma once

#include <stdexcept>
#include <string>

namespace tdmix {

// Exit-code contract: 1 usage/config, 2 data, 3 numerical failure.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  static constexpr int exit_code = 1;
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  static constexpr int exit_code = 2;
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
  static constexpr int exit_code = 3;
};

}  // namespace tdmix
