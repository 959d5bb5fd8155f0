#pragma once

#include <stdexcept>
#include <string>

namespace t3i {

/// Input that violates the physical model (non-closure where closure is
/// required, a packet leaving the grid, a degenerate transition, ...).
/// The CLI maps this to exit code 2.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed sequence files and CSV inputs. The CLI maps this to exit code 1.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(format(what, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }

  int line_;
  int column_;
};

}  // namespace t3i
