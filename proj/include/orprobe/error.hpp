#pragma once

#include <stdexcept>
#include <string>

namespace orprobe {

// Every failure raised by the toolkit derives from Error so the CLI can map
// failure classes to exit codes without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

/// atan2 of a zero (sin, cos) pair.
class UndefinedAngle : public Error {
public:
    using Error::Error;
};

/// Target shares the anchor's orientation, so the y-ratio has no denominator.
class ExcludedSample : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace orprobe
