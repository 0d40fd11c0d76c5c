#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rcs {

// Every failure the library reports carries one of these codes so callers
// (tests, the CLI's exit-code mapping) can branch without parsing messages.
enum class ErrorCode {
  // molgraph
  kEmptyInput,
  kUnbalancedBranch,
  kUnmatchedRingBond,
  kUnknownElement,
  kInvalidSyntax,
  kInvalidNodeId,
  kEmptySelection,
  kMalformedRecord,
  kSchemaVersionMismatch,
  kInvalidGraph,
  // tensorcore
  kShapeMismatch,
  kEmptySegment,
  kNotScalarLoss,
  kVersionMismatch,
  kCorruptFile,
  // encoder
  kIsolatedNode,
  // env
  kEmptyGraph,
  kIllegalAction,
  kUnreachableTarget,
  // agent
  kBufferTooSmall,
  // search
  kSizeExplosion,
  // evalkit
  kMissingPrediction,
  kTooFewSamples,
  kMotifPlantFailure,
  // baselines
  kWidthMismatch,
  kMatchExplosion,
  kEmptyTrainSet,
  // cli / io
  kInvalidConfig,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rcs
