#pragma once

#include <stdexcept>
#include <string>

namespace epiportrait {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input is structurally unusable (missing header, malformed document).
struct FormatError : Error {
  using Error::Error;
};

// Input parsed but violates a data invariant (duplicate code, negative count).
struct ValidationError : Error {
  using Error::Error;
};

struct NotFound : Error {
  using Error::Error;
};

// Raised when an RNA category has no positive value in any community.
struct DegenerateCategory : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

}  // namespace epiportrait
