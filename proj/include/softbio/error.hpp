#pragma once

#include <stdexcept>
#include <string>

namespace softbio {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Geometric failure: a point behind the camera, a ray parallel to the
/// ground, an unobservable height or a non-converging undistortion.
class GeometryError : public Error {
public:
    enum class Kind { BehindCamera, DegenerateRay, UnobservableHeight, NonConvergence };

    GeometryError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Malformed or inconsistent input data. `locus` names the file and line or
/// record that triggered it, when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string locus = {})
        : Error(locus.empty() ? what : locus + ": " + what), message_(what), locus_(std::move(locus)) {}

    const std::string& message() const noexcept { return message_; }
    const std::string& locus() const noexcept { return locus_; }

private:
    std::string message_;
    std::string locus_;
};

/// Engine misconfiguration detected while running a query.
class EngineError : public Error {
public:
    using Error::Error;
};

}  // namespace softbio
