#include "dtcx/error.hpp"

namespace dtcx {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::TargetNotBinary: return "TargetNotBinary";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteModelOutput: return "NonFiniteModelOutput";
    case ErrorCode::TooFewTrajectories: return "TooFewTrajectories";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptArtifact: return "CorruptArtifact";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dtcx
