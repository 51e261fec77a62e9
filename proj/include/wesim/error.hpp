#pragma once

#include <stdexcept>
#include <string>

namespace wesim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The workflow graph is not executable (cycle, dangling reference, ...).
class InvalidDag : public Error {
public:
    using Error::Error;
};

/// The simulation could not complete, e.g. a task fits on no node.
class SimulationError : public Error {
public:
    using Error::Error;
};

} // namespace wesim
