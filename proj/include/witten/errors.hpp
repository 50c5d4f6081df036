#pragma once

#include <stdexcept>
#include <string>

namespace witten {

/// Violated precondition or malformed input.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative method failed to converge or a construction broke down.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigenvalues below a counting threshold were not all converged.
class InsufficientResolution : public NumericalError {
public:
    explicit InsufficientResolution(const std::string& what) : NumericalError(what) {}
};

}  // namespace witten
