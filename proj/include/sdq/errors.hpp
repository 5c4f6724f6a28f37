#pragma once

#include <stdexcept>
#include <string>

namespace sdq {

// Analysis was requested outside its stability domain (e.g. busy-period
// expectations with rho >= 1).
class StabilityViolation : public std::runtime_error {
public:
    explicit StabilityViolation(const std::string& what) : std::runtime_error(what) {}
};

// A theorem-backed operation was invoked with its hypothesis unmet; the
// message names the failed condition.
class HypothesisNotSatisfied : public std::runtime_error {
public:
    explicit HypothesisNotSatisfied(const std::string& what) : std::runtime_error(what) {}
};

// An iterative scheme hit its iteration cap before reaching tolerance.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double residual)
        : std::runtime_error(what), last_residual(residual) {}
    double last_residual;
};

// Numerical failure with no better classification (singular solve,
// quadrature breakdown, tied dominant eigenvalues past the fallback).
class IllConditioned : public std::runtime_error {
public:
    explicit IllConditioned(const std::string& what) : std::runtime_error(what) {}
};

// Fluid integration accumulated an implausible number of breakpoints.
class PolicyLivelock : public std::runtime_error {
public:
    explicit PolicyLivelock(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sdq
