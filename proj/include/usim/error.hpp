#pragma once

#include <stdexcept>
#include <string>

namespace usim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed interchange document (bad JSON, missing or mistyped field).
struct FormatError : Error {
  using Error::Error;
};

// Well-formed document whose graph breaks a structural invariant.
struct ValidationError : Error {
  using Error::Error;
};

struct LookupError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// Two corpora (or a manifest and its graphs) that cannot be put in correspondence.
struct PairingError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace usim
