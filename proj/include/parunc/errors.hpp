#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace parunc {

// Bad input to an operation; maps to exit code 2 in the CLI.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Cholesky hit a pivot below the PSD tolerance.
class NotPsdError : public std::domain_error {
public:
    NotPsdError(std::size_t pivot_index, double pivot_value);

    std::size_t pivot_index() const noexcept { return pivot_index_; }
    double pivot_value() const noexcept { return pivot_value_; }

private:
    std::size_t pivot_index_;
    double pivot_value_;
};

// A computation left its mathematical domain (e.g. non-positive radicand).
class NumericDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Valid input for which the requested combination is not implemented.
class Unsupported : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace parunc
