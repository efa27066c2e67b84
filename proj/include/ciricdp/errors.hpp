#pragma once

#include <stdexcept>
#include <string>

namespace ciricdp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector lengths disagree with each other or with the model.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A control is not in U(x), or a policy picks one that is not.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// Malformed model document (bad JSON, missing keys, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a model or type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Scalar argument outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A contraction check ended up with no usable pairs.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// The initial value function fails FV_0 < V_0 while enforcement is on.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Policy enumeration refused because the policy count exceeds the cap.
class CapExceededError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A numerical invariant that must hold by construction did not.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace ciricdp
