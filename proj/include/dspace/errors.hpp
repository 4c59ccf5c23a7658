#pragma once

#include <stdexcept>
#include <string>

namespace dspace {

// Base class for all framework errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A request contradicts the configured setup: unknown actuator kind, unknown
// space or property, unsupported option, malformed job document semantics.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// A configuration lies outside the probability space it was submitted to.
class EncapsulationError : public Error {
public:
    using Error::Error;
};

// A write would violate the store's measurement policy.
class PolicyViolation : public Error {
public:
    using Error::Error;
};

// A value mapping does not cover a value it claims to cover.
class MappingError : public Error {
public:
    using Error::Error;
};

// Persistent state is internally inconsistent (for example a sampling record
// that references a missing entity).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// A document violates its schema; carries the offending field path.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& message)
        : Error("schema violation at '" + field + "': " + message), field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// An import file could not be parsed; carries the 1-based line number.
class ImportError : public Error {
public:
    ImportError(std::size_t line, const std::string& message)
        : Error("import failed at line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Numeric input admits no meaningful answer (constant regressor, constant
// clustering features).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// Too few observations for the requested statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Underlying storage failure (I/O, locking, corruption).
class StoreError : public Error {
public:
    using Error::Error;
};

}  // namespace dspace
