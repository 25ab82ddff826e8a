#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stz {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ingest
class EmptySource : public Error {
public:
    EmptySource() : Error("source contains no data rows") {}
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t row, std::string reason);
    std::size_t row() const noexcept { return row_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t row_;
    std::string reason_;
};

class UnimputableWeekday : public Error {
public:
    explicit UnimputableWeekday(std::string weekday);
    const std::string& weekday() const noexcept { return weekday_; }

private:
    std::string weekday_;
};

class PartialWeek : public Error {
public:
    using Error::Error;
};

// temporal models
class NegativeInput : public Error {
public:
    using Error::Error;
};

class SeriesTooShort : public Error {
public:
    using Error::Error;
};

class NonCausalParams : public Error {
public:
    NonCausalParams() : Error("AR polynomial has a root on or inside the unit circle") {}
};

class NonInvertibleParams : public Error {
public:
    NonInvertibleParams() : Error("MA polynomial has a root on or inside the unit circle") {}
};

class OptimizerFailure : public Error {
public:
    using Error::Error;
};

class NoConvergedFit : public Error {
public:
    using Error::Error;
};

class ConstraintViolation : public Error {
public:
    using Error::Error;
};

class ConstantSeries : public Error {
public:
    ConstantSeries() : Error("series has zero variance") {}
};

// regression
class MissingCovariates : public Error {
public:
    explicit MissingCovariates(std::string zone_id);
    const std::string& zone_id() const noexcept { return zone_id_; }

private:
    std::string zone_id_;
};

class Underdetermined : public Error {
public:
    using Error::Error;
};

// spatial
class InvalidGeometry : public Error {
public:
    InvalidGeometry(std::string zone_id, const std::string& reason);
    const std::string& zone_id() const noexcept { return zone_id_; }

private:
    std::string zone_id_;
};

class ConstantValues : public Error {
public:
    ConstantValues() : Error("values are constant across zones") {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// pipeline
class WindowTooSmall : public Error {
public:
    using Error::Error;
};

class EmptyWindowForZone : public Error {
public:
    EmptyWindowForZone(std::string zone_id, const std::string& window);
    const std::string& zone_id() const noexcept { return zone_id_; }

private:
    std::string zone_id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace stz
