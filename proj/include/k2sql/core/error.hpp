#pragma once

#include <stdexcept>
#include <string>

namespace k2sql {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files or databases that cannot be read or parsed.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Values that violate a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace k2sql
