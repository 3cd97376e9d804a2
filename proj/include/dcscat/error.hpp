#pragma once

#include <stdexcept>
#include <string>

namespace dcscat {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: invalid parameters, malformed config, inconsistent requests.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Numerical failure inside a solve (singular sector, step underflow, ...).
class SolverFailure : public Error {
public:
    using Error::Error;
};

// A search (calibration, resonance) found nothing in the requested range.
class NotFound : public Error {
public:
    using Error::Error;
};

// Radius at or inside the hard wall.
class InsideHardWall : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Scattering length so large that the threshold extrapolation is meaningless.
class NearZeroEnergyResonance : public SolverFailure {
public:
    NearZeroEnergyResonance(const std::string& what, double estimate)
        : SolverFailure(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

}  // namespace dcscat
