#pragma once

#include <stdexcept>
#include <string>

namespace cafk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant (bad config, bad pose, bad settings).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file does not follow the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Data does not belong to the configuration it is used with (cable count, name).
class ConfigMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class InfeasibleBounds : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

/// Training loss became non-finite.
class DivergenceDetected : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cafk
