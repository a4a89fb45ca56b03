#pragma once

#include <stdexcept>
#include <string>

namespace identikit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an argument does not hold (bad sizes, σ ≤ 0, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

// The model produced NaN/Inf, i.e. it was evaluated outside its valid region.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class IntegratorError : public Error {
public:
    using Error::Error;
};

} // namespace identikit
