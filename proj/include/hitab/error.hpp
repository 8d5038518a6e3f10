#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hitab {

// Every failure raised by the library carries one of these codes so callers
// (and the CLI) can branch on the kind without parsing messages.
enum class ErrorCode {
  // table-model / ingest
  OverlappingMerge,
  MergeOutOfBounds,
  EmptyDataRegion,
  TreeCoverageGap,
  InvalidTree,
  MalformedJson,
  SchemaViolation,
  CellOutOfBounds,
  // formula-engine
  ParseError,
  RefOutOfBounds,
  DivisionByZero,
  LookupMiss,
  EmptyAggregate,
  TypeMismatch,
  // logical-form
  SyntaxError,
  UnknownFunction,
  GrammarViolation,
  // interpreter
  EmptySelection,
  MixedSides,
  ShapeError,
  RankOutOfRange,
  NoNumericData,
  LevelUnreachable,
  UnresolvedHeader,
  // linearize / eval
  LengthMismatch,
  UnknownSampleId,
  MissingGoldProgram,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OverlappingMerge: return "OverlappingMerge";
    case ErrorCode::MergeOutOfBounds: return "MergeOutOfBounds";
    case ErrorCode::EmptyDataRegion: return "EmptyDataRegion";
    case ErrorCode::TreeCoverageGap: return "TreeCoverageGap";
    case ErrorCode::InvalidTree: return "InvalidTree";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::CellOutOfBounds: return "CellOutOfBounds";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RefOutOfBounds: return "RefOutOfBounds";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::LookupMiss: return "LookupMiss";
    case ErrorCode::EmptyAggregate: return "EmptyAggregate";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::GrammarViolation: return "GrammarViolation";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::MixedSides: return "MixedSides";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::NoNumericData: return "NoNumericData";
    case ErrorCode::LevelUnreachable: return "LevelUnreachable";
    case ErrorCode::UnresolvedHeader: return "UnresolvedHeader";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownSampleId: return "UnknownSampleId";
    case ErrorCode::MissingGoldProgram: return "MissingGoldProgram";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hitab
