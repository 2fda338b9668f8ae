#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace focktomo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside its mathematical domain (efficiency outside [0,1], non-positive width, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested Fock or pattern-function order above the supported cap.
class UnsupportedOrderError : public Error {
 public:
  UnsupportedOrderError(int order, int cap)
      : Error("order " + std::to_string(order) + " exceeds supported maximum " + std::to_string(cap)),
        order_(order), cap_(cap) {}
  int order() const noexcept { return order_; }
  int cap() const noexcept { return cap_; }

 private:
  int order_;
  int cap_;
};

/// Inconsistent acquisition geometry (pulse outside frame, overlapping windows).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Malformed frame file. Carries the byte offset at which parsing failed.
class ParseError : public Error {
 public:
  enum class Kind { BadMagic, BadVersion, BadHeader, Truncated, TrailingData };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), kind_(kind), offset_(offset) {}
  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// I/O failure; message includes the path.
class IoError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class HistogramError : public Error {
 public:
  using Error::Error;
};

/// Iterative fit did not converge.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Fitted parameter is outside the range the model can explain.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

/// Sample outside the tabulated quadrature range, or non-finite likelihood.
class DataRangeError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ComparisonError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `location` is "file:line" or the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& location, const std::string& what)
      : Error(location + ": " + what), location_(location) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace focktomo
