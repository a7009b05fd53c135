#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace agvsb {

/// Integer grid coordinate. x grows to the right, y grows upward; y = 0 is the
/// bottom edge of the warehouse.
struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

inline int manhattan(Cell a, Cell b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

inline bool adjacent4(Cell a, Cell b) { return manhattan(a, b) == 1; }

inline std::ostream& operator<<(std::ostream& os, Cell c) {
  return os << '(' << c.x << ',' << c.y << ')';
}

struct CellHash {
  std::size_t operator()(Cell c) const noexcept {
    return std::hash<std::int64_t>{}((static_cast<std::int64_t>(c.x) << 32) ^
                                     static_cast<std::uint32_t>(c.y));
  }
};

using OrderId = int;
using AgvId = int;

// Error hierarchy. Every recoverable failure in the library is one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownZoneError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when a simulation makes no progress for too long.
class DeadlockError : public Error {
 public:
  using Error::Error;
};

/// Raised when Q-learning loss blows up.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace agvsb
