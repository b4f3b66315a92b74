#pragma once

#include <stdexcept>
#include <string>

namespace dgm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, unknown identifiers, bad CLI usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between blocks, matrices, points or seeds.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite parameters, inputs or losses.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (e.g. a point that is not on the boundary).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgm
