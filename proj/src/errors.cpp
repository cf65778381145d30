#include "topicfuse/errors.hpp"

namespace topicfuse {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateTopicId: return "DuplicateTopicId";
    case ErrorKind::BadPattern: return "BadPattern";
    case ErrorKind::WrongRuleCount: return "WrongRuleCount";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IdOutOfRange: return "IdOutOfRange";
    case ErrorKind::AllPositionsMasked: return "AllPositionsMasked";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownDocId: return "UnknownDocId";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroTotalSupport: return "ZeroTotalSupport";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::InconsistentTestSets: return "InconsistentTestSets";
    case ErrorKind::UnknownVariant: return "UnknownVariant";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::DuplicateDocId: return "DuplicateDocId";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

ErrorCategory error_category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteValue:
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::IoError:
      return ErrorCategory::Runtime;
    default:
      return ErrorCategory::Validation;
  }
}

}  // namespace topicfuse
