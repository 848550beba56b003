#pragma once

#include <stdexcept>
#include <string>

namespace msgfem {

/// Violated precondition on user-supplied data (sizes, parameters, set relations).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed in a way that signals a modelling or assembly problem
/// (singular local system, indefinite reduced matrix, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace msgfem
