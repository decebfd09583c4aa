#pragma once

#include <stdexcept>
#include <string>

namespace rflab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is outside its documented range.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A metric or field violates its invariants (grid size, positivity, NaN).
class InvalidMetric : public Error {
public:
    using Error::Error;
};

class SolverNoConvergence : public Error {
public:
    using Error::Error;
};

class ZeroField : public Error {
public:
    using Error::Error;
};

class NonPositiveEigenfunction : public Error {
public:
    using Error::Error;
};

/// Time step exceeds the explicit diffusion bound.
class StabilityViolation : public Error {
public:
    using Error::Error;
};

/// Metric degenerated (r2 <= 0) or the conformal factor exceeded its cap.
class BlowUp : public Error {
public:
    using Error::Error;
};

class DomainExhausted : public Error {
public:
    using Error::Error;
};

/// Two algebraically equivalent evaluations disagree beyond tolerance.
class FormMismatch : public Error {
public:
    using Error::Error;
};

class ConfigInvalid : public Error {
public:
    ConfigInvalid(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace rflab
