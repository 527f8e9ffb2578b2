#pragma once

#include <stdexcept>
#include <string>

namespace lorentz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller: bad parameter range, unnormalized
// measure, non-timelike pair.
class DomainError : public Error {
public:
    using Error::Error;
};

// Parameters outside every admissible case of a closed-form formula.
class RegimeError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

class MonotonicityError : public Error {
public:
    using Error::Error;
};

// Malformed or unsupported file / config input.
class InputError : public Error {
public:
    using Error::Error;
};

class VersionError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace lorentz
