#ifndef PLUCASE_ERROR_HPP
#define PLUCASE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plucase {

enum class ErrorCode {
  SyntaxError,
  DanglingReference,
  SchemaError,
  UnknownReference,
  ModelMismatch,
  InvalidDecisions,
  MalformedFlow,
  IncludeCycle,
  AmbiguousTrace,
  HistorySchemaError,
  UnknownTest,
  ConstantOutcome,
  NoFailures,
  EmptyInput,
  IOFailure,
  UsageError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::InvalidDecisions: return "InvalidDecisions";
    case ErrorCode::MalformedFlow: return "MalformedFlow";
    case ErrorCode::IncludeCycle: return "IncludeCycle";
    case ErrorCode::AmbiguousTrace: return "AmbiguousTrace";
    case ErrorCode::HistorySchemaError: return "HistorySchemaError";
    case ErrorCode::UnknownTest: return "UnknownTest";
    case ErrorCode::ConstantOutcome: return "ConstantOutcome";
    case ErrorCode::NoFailures: return "NoFailures";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IOFailure: return "IOFailure";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Error";
}

// Hard failure carrying an error category and, when known, a source line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? std::string(to_string(code)) + " (line " +
                                          std::to_string(line) + "): " + message
                                    : std::string(to_string(code)) + ": " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const { return code_; }
  int line() const { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

// Non-fatal validation output (consistency checks, decision validation,
// cross-checks). Warnings do not abort a run; the CLI maps a non-empty
// findings list to exit code 1.
struct Finding {
  enum class Severity { Warning, Violation };
  Severity severity = Severity::Violation;
  std::string rule;     // short machine-readable tag, e.g. "cardinality"
  std::string message;  // human-readable description
};

using Findings = std::vector<Finding>;

}  // namespace plucase

#endif
