#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace uavedge {

// A configuration value violates its documented constraint. `field` names the
// offending key (dotted path when loaded from a file, e.g. "sim.alpha").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Array/vector dimensions disagree with what a network or environment expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { io, parse, version, shape };

  CheckpointError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Malformed metrics CSV; row is 1-based counting the header, column is 1-based.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t row, std::size_t column, const std::string& message)
      : std::runtime_error("row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ": " + message),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace uavedge
