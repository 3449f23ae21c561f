#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracdrift {

/// Invalid argument or violated precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base class for failures of a numerical routine on valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Covariance factorization hit a non-positive pivot.
class FactorizationError : public NumericalError {
public:
    FactorizationError(std::size_t pivot, double value)
        : NumericalError("covariance factorization failed at pivot " + std::to_string(pivot) +
                         " (value " + std::to_string(value) + ")"),
          pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Circulant embedding produced a negative eigenvalue.
class EmbeddingError : public NumericalError {
public:
    EmbeddingError(std::size_t index, double value)
        : NumericalError("circulant embedding has negative eigenvalue " + std::to_string(value) +
                         " at index " + std::to_string(index)),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A simulated state or sampled function value became NaN/inf.
class NonFiniteError : public NumericalError {
public:
    NonFiniteError(const std::string& what, std::size_t index)
        : NumericalError(what + " is not finite at index " + std::to_string(index)), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// exp(...) in a kernel-weighted correction would overflow.
class ExponentOverflowError : public NumericalError {
public:
    explicit ExponentOverflowError(double max_exponent)
        : NumericalError("exponent " + std::to_string(max_exponent) +
                         " overflows; sup-norm of the exponent drift times T is too large"),
          max_exponent_(max_exponent) {}
    double max_exponent() const noexcept { return max_exponent_; }

private:
    double max_exponent_;
};

}  // namespace fracdrift
