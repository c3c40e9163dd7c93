#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace heatlab {

/// Malformed argument: wrong dimension, parameter out of range, empty set.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical precondition of the operation does not hold on this instance.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The request is meaningless for the structure of the space (e.g. a degenerate form).
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter combination outside the supported range (e.g. p > q).
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A subtracted potential failed the strong positivity test; carries the violating function.
class RejectedPotential : public PreconditionError {
public:
    RejectedPotential(const std::string& what, double margin, std::vector<double> witness)
        : PreconditionError(what), margin_(margin), witness_(std::move(witness)) {}

    double margin() const { return margin_; }
    const std::vector<double>& witness() const { return witness_; }

private:
    double margin_;
    std::vector<double> witness_;
};

} // namespace heatlab
