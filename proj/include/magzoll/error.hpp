#pragma once

#include <stdexcept>
#include <string>

namespace magzoll {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The warping function a is not strictly positive.
class NonPositiveWarping : public Error {
public:
    using Error::Error;
};

/// The average of b is negative; callers must flip orientation and sign of b themselves.
class NegativeAverage : public Error {
public:
    using Error::Error;
};

/// An iterative method (root finder, adaptive quadrature, inversion) failed to converge.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// |a'| < ab is violated, so the torus sections are not global surfaces of section.
class SectionConditionViolated : public Error {
public:
    using Error::Error;
};

/// The adaptive ODE integrator required a step below its floor.
class StepUnderflow : public Error {
public:
    using Error::Error;
};

/// A trajectory expected to be closed did not close within tolerance.
class NotClosed : public Error {
public:
    using Error::Error;
};

/// The requested operation only exists for flat metrics (a == 1).
class FlatOnly : public Error {
public:
    using Error::Error;
};

class ParameterOutOfRange : public Error {
public:
    using Error::Error;
};

/// 2*pi*m0/b_con is not a zero of J1.
class NotAdmissible : public Error {
public:
    using Error::Error;
};

/// Malformed command line or system specification. The CLI maps this to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace magzoll
