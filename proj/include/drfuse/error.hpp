#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drfuse {

enum class ErrorKind {
    // probability / panel validation
    NonFiniteEntry,
    NegativeEntry,
    SumOutOfRange,
    MissingCell,
    ConflictingLabel,
    DuplicateRecord,
    // metrics
    LengthMismatch,
    LabelOutOfRange,
    DegenerateDistribution,
    EmptyClass,
    SingleClassTruth,
    // splitting
    InfeasibleFractions,
    IncompleteAssignment,
    // losses / networks
    NonFiniteInput,
    ShapeMismatch,
    ZeroCount,
    WidthMismatch,
    EmptySubset,
    CorruptModelFile,
    DimensionMismatch,
    // simulator / selection
    InfeasibleAccuracy,
    PoolTooSmall,
    // tooling
    Config,
    Usage,
    Io,
    MalformedFile,
    Internal,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

/// Process exit code for an error kind: 1 usage/config, 2 data validation, 3 internal.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace drfuse
