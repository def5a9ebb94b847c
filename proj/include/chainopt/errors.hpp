#pragma once

#include <stdexcept>
#include <string>

namespace chainopt {

// Base class for all library-specific failures.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A constraint system admits no solution (inconsistent equalities,
// disconnected backbone for the requested variable space, and so on).
class InfeasibleError : public Error {
public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

// A computation produced values outside its contract: singular solves,
// non-positive stationary distributions, reducible supports.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Malformed input files (graphs, weight vectors, run configurations).
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace chainopt
