#pragma once

#include <stdexcept>
#include <string>

namespace edgelo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad interval, bad index, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The input geometry does not determine the requested quantity.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents do not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgelo
