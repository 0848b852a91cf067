// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_ERROR_HPP
#define PASSGYM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace passgym {

// Error categories map onto CLI exit codes:
//   ConfigError -> 1, DataError/ParseError -> 2, NumericError -> 3.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text-format or file parsing failure with a 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& message)
      : DataError("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace passgym

#endif  // PASSGYM_ERROR_HPP
