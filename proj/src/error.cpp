#include "drfuse/error.hpp"

namespace drfuse {

std::string_view error_kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorKind::NegativeEntry: return "NegativeEntry";
        case ErrorKind::SumOutOfRange: return "SumOutOfRange";
        case ErrorKind::MissingCell: return "MissingCell";
        case ErrorKind::ConflictingLabel: return "ConflictingLabel";
        case ErrorKind::DuplicateRecord: return "DuplicateRecord";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorKind::DegenerateDistribution: return "DegenerateDistribution";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::SingleClassTruth: return "SingleClassTruth";
        case ErrorKind::InfeasibleFractions: return "InfeasibleFractions";
        case ErrorKind::IncompleteAssignment: return "IncompleteAssignment";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::ZeroCount: return "ZeroCount";
        case ErrorKind::WidthMismatch: return "WidthMismatch";
        case ErrorKind::EmptySubset: return "EmptySubset";
        case ErrorKind::CorruptModelFile: return "CorruptModelFile";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InfeasibleAccuracy: return "InfeasibleAccuracy";
        case ErrorKind::PoolTooSmall: return "PoolTooSmall";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::Usage: return "UsageError";
        case ErrorKind::Io: return "IoError";
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::Internal: return "InternalError";
    }
    return "UnknownError";
}

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Usage:
            return 1;
        case ErrorKind::Internal:
            return 3;
        default:
            return 2;
    }
}

}  // namespace drfuse
