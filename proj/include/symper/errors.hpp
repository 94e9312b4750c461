#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symper {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: mismatched shapes, zero vectors, malformed configuration.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidDimension : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidParameter : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// An implicit stage failed to converge (or produced non-finite values).
class PropagationFailure : public Error {
public:
    PropagationFailure(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class SpectralFailure : public Error {
public:
    using Error::Error;
};

/// The quantity is undefined for this input (e.g. a gap over an off-circle spectrum).
class NotApplicable : public Error {
public:
    using Error::Error;
};

class InternalConsistency : public Error {
public:
    using Error::Error;
};

}  // namespace symper
