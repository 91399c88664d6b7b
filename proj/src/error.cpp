#include "lud/error.hpp"

namespace lud {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case ErrorCode::UnexpectedToken: return "UnexpectedToken";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownKeyword: return "UnknownKeyword";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::SizeOutOfRange: return "SizeOutOfRange";
    case ErrorCode::MalformedGraph: return "MalformedGraph";
    case ErrorCode::TooLargeForExhaustive: return "TooLargeForExhaustive";
    case ErrorCode::UnsupportedLudemeCombination: return "UnsupportedLudemeCombination";
    case ErrorCode::PlacementConflict: return "PlacementConflict";
    case ErrorCode::CalledOnTerminal: return "CalledOnTerminal";
    case ErrorCode::IllegalMove: return "IllegalMove";
    case ErrorCode::StateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::TooFewTaxa: return "TooFewTaxa";
    case ErrorCode::MissingLeafTrait: return "MissingLeafTrait";
    case ErrorCode::MissingDate: return "MissingDate";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MetadataMismatch: return "MetadataMismatch";
    case ErrorCode::InvalidSlotPath: return "InvalidSlotPath";
    case ErrorCode::EmptySlot: return "EmptySlot";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::UnknownGame: return "UnknownGame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     const std::optional<SourceSpan>& span) {
  std::string out(to_string(code));
  if (span) {
    out += " at " + std::to_string(span->line) + ":" + std::to_string(span->column);
  }
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<SourceSpan> span)
    : std::runtime_error(decorate(code, message, span)), code_(code), span_(span) {}

}  // namespace lud
