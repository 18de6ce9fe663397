#pragma once

#include <stdexcept>
#include <string>

namespace snrlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter set violates a documented invariant. `field()` carries the
/// dotted path of the offending field (e.g. "optics.zeta") when known.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace snrlab
