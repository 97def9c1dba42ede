#pragma once

#include <stdexcept>
#include <string>

namespace cvlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field sizes violate a transform precondition (e.g. non power-of-two in strict mode).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Two fields or a field and a frame live on different grids.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

// An atom or region is too small for the sampling grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvlab
