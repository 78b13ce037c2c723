#pragma once

#include <stdexcept>
#include <string>

namespace rodeo {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input fails a documented precondition (non-Hermitian matrix, bad bitstring, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Sizes disagree or exceed a supported limit.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A forced measurement branch has zero probability.
class DegenerateBranchError : public Error {
 public:
  using Error::Error;
};

// Joint post-selection probability fell below the representable floor.
class UnderflowError : public Error {
 public:
  using Error::Error;
};

// Eigenstate preparation target is not isolated from other occupied levels.
class AmbiguousTargetError : public Error {
 public:
  using Error::Error;
};

class SearchFailedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace rodeo
