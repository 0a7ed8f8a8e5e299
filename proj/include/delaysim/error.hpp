// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace delaysim {

// Base of every error the library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad delay configuration or simulation parameters.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Simulation could not be carried out (inconsistent plan, cycles).
class SimulationError : public Error {
public:
  using Error::Error;
};

// Timetable failed validation; what() lists the violations.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Unknown case, metric, column or statistic.
class LookupError : public Error {
public:
  using Error::Error;
};

// Metric requested that needs data the timetable lacks
// (e.g. passenger loads), or is not defined for the case kind.
class MetricError : public Error {
public:
  using Error::Error;
};

// Malformed text input with a location.
class ParseError : public Error {
public:
  // `invalid` marks well-formed input that breaks a timetable invariant.
  ParseError(std::size_t line, std::string column, std::string const& message, bool invalid = false)
      : Error(format(line, column, message)),
        line_(line),
        column_(std::move(column)),
        invalid_(invalid) {}

  std::size_t line() const noexcept { return line_; }
  std::string const& column() const noexcept { return column_; }
  bool invalid() const noexcept { return invalid_; }

private:
  static std::string format(std::size_t line, std::string const& column,
                            std::string const& message) {
    std::string out = "line " + std::to_string(line);
    if (!column.empty()) {
      out += ", column '" + column + "'";
    }
    return out + ": " + message;
  }

  std::size_t line_;
  std::string column_;
  bool invalid_;
};

// Ensemble file problems: version, truncation, checksum.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace delaysim
