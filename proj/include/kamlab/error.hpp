#pragma once

#include <stdexcept>
#include <string>

namespace kamlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the documented domain of an operation (bad box, odd cap, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An operation received too little data to produce a meaningful answer.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// A precondition stated on an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An iteration (Lie series, Neumann solve, fixed point) stopped contracting.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace kamlab
