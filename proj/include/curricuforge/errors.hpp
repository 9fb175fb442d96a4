#pragma once

#include <stdexcept>
#include <string>

namespace curricuforge {

/// Bad configuration or usage. CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent data. CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid geometric or numeric value in an input (NaN coordinates, unordered corners).
struct ValidationError : DataError {
    explicit ValidationError(const std::string& msg) : DataError(msg) {}
};

/// Record-level failure while reading a data file; message names the line.
struct IngestionError : DataError {
    explicit IngestionError(const std::string& msg) : DataError(msg) {}
};

/// A score table was queried on an id it does not cover.
struct CoverageError : DataError {
    explicit CoverageError(const std::string& msg) : DataError(msg) {}
};

/// Numerical failure. CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Geometry with no meaningful answer (e.g. two zero-area boxes).
struct DegenerateGeometryError : NumericError {
    explicit DegenerateGeometryError(const std::string& msg) : NumericError(msg) {}
};

/// Training diverged or produced non-finite values; message names the epoch.
struct TrainingError : NumericError {
    explicit TrainingError(const std::string& msg) : NumericError(msg) {}
};

} // namespace curricuforge
