#pragma once

#include <stdexcept>
#include <string>

namespace sparsetc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text, unbound names, arity problems.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Bad tensor data: out-of-bounds coordinates, malformed files, I/O failures,
/// invalid format descriptors.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent extents between operands, or between a tensor and a format.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsetc
