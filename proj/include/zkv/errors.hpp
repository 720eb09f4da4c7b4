#pragma once

#include <stdexcept>
#include <string>

namespace zkv {

// Bad caller input (mismatched grids, invalid parameters).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An iterative solver failed to converge or to bracket (CLI exit code 3).
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A computed result violated a declared postcondition; carries a diagnostic.
class PostconditionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A sign decision fell inside the configured resolution floor.
class IndeterminateSign : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace zkv
