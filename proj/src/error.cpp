#include "rcsearch/error.hpp"

namespace rcs {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnbalancedBranch: return "UnbalancedBranch";
    case ErrorCode::kUnmatchedRingBond: return "UnmatchedRingBond";
    case ErrorCode::kUnknownElement: return "UnknownElement";
    case ErrorCode::kInvalidSyntax: return "InvalidSyntax";
    case ErrorCode::kInvalidNodeId: return "InvalidNodeId";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptySegment: return "EmptySegment";
    case ErrorCode::kNotScalarLoss: return "NotScalarLoss";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kIsolatedNode: return "IsolatedNode";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kIllegalAction: return "IllegalAction";
    case ErrorCode::kUnreachableTarget: return "UnreachableTarget";
    case ErrorCode::kBufferTooSmall: return "BufferTooSmall";
    case ErrorCode::kSizeExplosion: return "SizeExplosion";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kMotifPlantFailure: return "MotifPlantFailure";
    case ErrorCode::kWidthMismatch: return "WidthMismatch";
    case ErrorCode::kMatchExplosion: return "MatchExplosion";
    case ErrorCode::kEmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rcs
