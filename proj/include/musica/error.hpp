#pragma once

#include <stdexcept>
#include <string>

namespace musica {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Structural problems: bad dimensions, mismatched sizes, invalid parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Pixel values outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// File exists but is not a supported image format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Noise level estimated as zero; the CNR ratio is undefined.
class DegenerateNoiseError : public Error {
public:
    using Error::Error;
};

} // namespace musica
