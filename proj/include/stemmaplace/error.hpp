#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stemmaplace {

enum class ErrorKind {
  // stemma
  CycleDetected,
  MultipleRoots,
  Disconnected,
  DuplicateEdge,
  DegenerateTree,
  MultipleParents,
  NotALeaf,
  UnknownNode,
  ParseError,
  // collation
  RaggedRow,
  DuplicateWitness,
  EmptyCollation,
  UnknownArchetype,
  TooManyVariants,
  NotLettered,
  // pairgen
  UnknownWitness,
  MissingWitnessColumn,
  ValidTooLarge,
  EmptyInput,
  // estimator
  EmptyTrainingSet,
  EmptyValidation,
  NonFiniteLoss,
  NoTokenEmitted,
  BadModelFile,
  BadHyperParams,
  // placement
  MissingEstimate,
  EstimateForUnknownNode,
  // evaluation
  LengthMismatch,
  Empty,
  BadRange,
  // scribesim
  BadParams,
  EmptyText,
  BadConfusionMatrix,
  // cli
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Error category used for process exit codes: 2 config, 3 data, 4 numerical.
enum class ErrorClass { Config = 2, Data = 3, Numerical = 4 };

ErrorClass classify(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stemmaplace
