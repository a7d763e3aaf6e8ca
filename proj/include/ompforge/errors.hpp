#pragma once

#include <stdexcept>
#include <string>

namespace ompforge {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input document (bad JSON, with line/column where known).
class SyntaxError : public Error {
public:
    using Error::Error;
};

// Well-formed document violating the schema: unknown key, wrong type,
// missing required field, or a value outside its allowed range.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Planning found nothing to do for the requested cadence.
class PlanError : public Error {
public:
    using Error::Error;
};

// Internal invariant violation inside the pipeline executor.
class EngineError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnsupportedExtension : public Error {
public:
    using Error::Error;
};

// Compiler executable (or mock manifest) missing.
class ToolchainUnavailable : public Error {
public:
    using Error::Error;
};

class DuplicateTest : public Error {
public:
    using Error::Error;
};

// Outcomes span more than one (toolchain, target, suite) tuple.
class MixedScope : public Error {
public:
    using Error::Error;
};

class ScopeMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class EmptySamples : public Error {
public:
    using Error::Error;
};

class AppMismatch : public Error {
public:
    using Error::Error;
};

// Two mock globs of equal specificity match the same self-test name.
class AmbiguousGlob : public Error {
public:
    using Error::Error;
};

// Mock lookup miss with no default behavior to fall back to.
class UnknownSubject : public Error {
public:
    using Error::Error;
};

} // namespace ompforge
