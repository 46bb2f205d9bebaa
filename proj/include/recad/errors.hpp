#ifndef RECAD_ERRORS_HPP
#define RECAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace recad {

/// Base class for all recad exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invariant violation while constructing a domain object.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Parameter outside the knot-vector span of some direction.
class DomainError : public Error {
public:
    DomainError(const std::string& msg, int direction)
        : Error(msg), direction(direction) {}
    int direction;
};

/// Illegal refinement request (e.g. knot multiplicity overflow).
class RefinementError : public Error {
public:
    using Error::Error;
};

/// Fit problem is ill-posed (rank deficiency, size mismatch, ...).
class FitError : public Error {
public:
    FitError(const std::string& msg, std::vector<int> unconstrained = {})
        : Error(msg), unconstrained_control_points(std::move(unconstrained)) {}
    std::vector<int> unconstrained_control_points;
};

/// Curve/surface association failure during sampling augmentation.
class AssociationError : public Error {
public:
    using Error::Error;
};

/// Composition preconditions violated (containment, rational trivariate, ...).
class CompositionError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; line is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = 0) : Error(msg), line(line) {}
    long line;
};

/// Filesystem / stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace recad

#endif
