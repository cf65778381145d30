#pragma once

#include <stdexcept>
#include <string>

namespace topicfuse {

// Every recoverable failure in the library throws Error with one of these
// kinds. Validation kinds map to CLI exit code 2, Runtime kinds to 3.
enum class ErrorKind {
  MissingFile,
  ParseError,
  DuplicateTopicId,
  BadPattern,
  WrongRuleCount,
  ShapeMismatch,
  IdOutOfRange,
  AllPositionsMasked,
  NonFiniteValue,
  EmptyCorpus,
  SequenceTooLong,
  DimensionMismatch,
  UnknownDocId,
  EmptyDataset,
  UnknownLabel,
  TooFewSamples,
  NonFiniteLoss,
  LengthMismatch,
  ZeroTotalSupport,
  DivisionByZero,
  InconsistentTestSets,
  UnknownVariant,
  MalformedLine,
  DuplicateDocId,
  IoError,
};

enum class ErrorCategory { Validation, Runtime };

ErrorCategory error_category(ErrorKind kind);
const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  ErrorCategory category() const { return error_category(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace topicfuse
