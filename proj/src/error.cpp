#include "stemmaplace/error.hpp"

namespace stemmaplace {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::DegenerateTree: return "DegenerateTree";
    case ErrorKind::MultipleParents: return "MultipleParents";
    case ErrorKind::NotALeaf: return "NotALeaf";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::DuplicateWitness: return "DuplicateWitness";
    case ErrorKind::EmptyCollation: return "EmptyCollation";
    case ErrorKind::UnknownArchetype: return "UnknownArchetype";
    case ErrorKind::TooManyVariants: return "TooManyVariants";
    case ErrorKind::NotLettered: return "NotLettered";
    case ErrorKind::UnknownWitness: return "UnknownWitness";
    case ErrorKind::MissingWitnessColumn: return "MissingWitnessColumn";
    case ErrorKind::ValidTooLarge: return "ValidTooLarge";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptyValidation: return "EmptyValidation";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NoTokenEmitted: return "NoTokenEmitted";
    case ErrorKind::BadModelFile: return "BadModelFile";
    case ErrorKind::BadHyperParams: return "BadHyperParams";
    case ErrorKind::MissingEstimate: return "MissingEstimate";
    case ErrorKind::EstimateForUnknownNode: return "EstimateForUnknownNode";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::BadConfusionMatrix: return "BadConfusionMatrix";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::NoTokenEmitted:
      return ErrorClass::Numerical;
    case ErrorKind::ConfigError:
    case ErrorKind::BadHyperParams:
    case ErrorKind::BadParams:
    case ErrorKind::BadRange:
    case ErrorKind::ValidTooLarge:
      return ErrorClass::Config;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace stemmaplace
