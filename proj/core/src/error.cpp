#include "hlc/error.hpp"

namespace hlc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::EmptyCatalog: return "EmptyCatalog";
    case ErrorCode::InvalidRequirement: return "InvalidRequirement";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::DuplicateExampleId: return "DuplicateExampleId";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::MissingReasoning: return "MissingReasoning";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ScriptMiss: return "ScriptMiss";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DuplicateRequirementId: return "DuplicateRequirementId";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::AlreadyValidated: return "AlreadyValidated";
    case ErrorCode::EmptyReasoning: return "EmptyReasoning";
    case ErrorCode::IndivisibleDataset: return "IndivisibleDataset";
    case ErrorCode::EmptyPredictions: return "EmptyPredictions";
    case ErrorCode::InconsistentReasoning: return "InconsistentReasoning";
  }
  return "Unknown";
}

bool is_parse_error(ErrorCode code) {
  return code == ErrorCode::MissingLabel || code == ErrorCode::MissingReasoning ||
         code == ErrorCode::UnknownLabel;
}

}  // namespace hlc
