#pragma once

#include <stdexcept>
#include <string>

namespace rom {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, truncated or unrecognised file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Tensor, grid or matrix dimensions that do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a formula or operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value or combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss/gradient during optimisation, or forecast divergence.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Singular systems and iterations that fail to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace rom
