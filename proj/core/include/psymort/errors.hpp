#pragma once

#include <stdexcept>
#include <string>

namespace psymort {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed configuration, or schema mismatch. CLI exit 2.
struct UsageError : Error {
    using Error::Error;
};

/// An input file whose header does not match the expected table schema.
struct SchemaError : UsageError {
    using UsageError::UsageError;
};

/// Invalid key or value in a generator/run configuration.
struct ConfigError : UsageError {
    using UsageError::UsageError;
};

/// A data row that cannot be parsed; carries the 1-based line number.
struct RowError : UsageError {
    RowError(long line_number, const std::string& message)
        : UsageError("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
    long line;
};

/// Filesystem failure while reading or writing artifacts. CLI exit 3.
struct IoError : Error {
    using Error::Error;
};

/// Referential-integrity violations rejected in strict mode. CLI exit 4.
struct IntegrityError : Error {
    using Error::Error;
};

/// Model training failure (degenerate input or optimizer breakdown).
struct TrainError : Error {
    using Error::Error;
};

/// An iterative solver ran out of budget before reaching its tolerance.
struct ConvergenceError : TrainError {
    using TrainError::TrainError;
};

/// Metric requested over degenerate inputs (e.g. single-class labels).
struct MetricError : Error {
    using Error::Error;
};

/// A cross-validation fold could not be evaluated. CLI exit 5.
struct FoldError : Error {
    FoldError(int fold_id, const std::string& message)
        : Error("fold " + std::to_string(fold_id) + ": " + message), fold(fold_id) {}
    int fold;
};

}  // namespace psymort
