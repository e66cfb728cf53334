#pragma once

#include <stdexcept>
#include <string>

namespace gmfg {

// Malformed caller input (non-finite values, mismatched shapes, bad config).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A scheme failed to do its job (singular system, positivity loss, ...).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

// Advection time step too large for the current drift; carries the largest
// admissible step so the caller can report it.
class CflViolation : public NumericalFailure {
public:
    CflViolation(const std::string& what, double required_dt)
        : NumericalFailure(what), required_dt(required_dt) {}
    double required_dt;
};

// The Hopf-Cole variable lost positivity; the transform back is undefined.
class PositivityLoss : public NumericalFailure {
public:
    explicit PositivityLoss(const std::string& what) : NumericalFailure(what) {}
};

} // namespace gmfg
