#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermoedge {

// Caller broke a documented precondition (shape mismatch, bad argument).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data could not be read or is malformed.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the netpbm reader; carries the byte offset where parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Invalid run configuration (flags, config file, environment overrides).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace thermoedge
