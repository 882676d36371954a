#pragma once

#include <stdexcept>
#include <string>

namespace cdiff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (bad state, bad time ordering, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration; the CLI maps this to a usage error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// State space too large for an enumerating oracle.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, diverging series, zero probabilities where a ratio is needed.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdiff
