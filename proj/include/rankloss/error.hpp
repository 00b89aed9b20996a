#pragma once

#include <stdexcept>
#include <string>

namespace rankloss {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVector : Error {
    ZeroVector() : Error("vector norm below 1e-30, cannot normalize") {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NotSquare : Error {
    using Error::Error;
};

struct NoPositives : Error {
    int query;
    explicit NoPositives(int q)
        : Error("query " + std::to_string(q) + " has no positive example"), query(q) {}
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

struct NotDivisible : Error {
    using Error::Error;
};

struct TooFewClasses : Error {
    using Error::Error;
};

struct EmptyAfterFilter : Error {
    EmptyAfterFilter() : Error("no class has enough examples after filtering") {}
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct ActivationsMissing : Error {
    ActivationsMissing() : Error("backward requires activations from a retain=true forward") {}
};

struct BadParam : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct VersionMismatch : Error {
    using Error::Error;
};

struct CorruptCheckpoint : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace rankloss
