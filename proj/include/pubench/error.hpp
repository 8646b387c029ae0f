#pragma once

#include <stdexcept>
#include <string>

namespace pubench {

// Bad input: invalid config, malformed file, violated precondition.
// The CLI maps this family to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& where, std::size_t row, std::size_t column,
             const std::string& what)
      : ValidationError(where + ":" + std::to_string(row) + ":" +
                        std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// A sampling call produced an empty D_P or D_U; callers retry with more data.
class DegenerateDraw : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// NaN or infinity showed up in a loss, gradient or parameter update.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures. Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pubench
