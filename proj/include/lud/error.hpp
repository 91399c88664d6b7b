#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lud {

enum class ErrorCode {
  // grammar
  UnbalancedParenthesis,
  UnexpectedToken,
  EmptyInput,
  UnknownKeyword,
  ArityMismatch,
  KindMismatch,
  MissingSection,
  // board
  SizeOutOfRange,
  MalformedGraph,
  TooLargeForExhaustive,
  // engine
  UnsupportedLudemeCombination,
  PlacementConflict,
  CalledOnTerminal,
  IllegalMove,
  StateBudgetExceeded,
  // analysis
  DuplicateName,
  TooFewTaxa,
  MissingLeafTrait,
  MissingDate,
  ParseError,
  MetadataMismatch,
  InvalidSlotPath,
  EmptySlot,
  BudgetExceeded,
  UnknownGame,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

struct SourceSpan {
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// Single exception type for the whole library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourceSpan> span = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourceSpan>& span() const noexcept { return span_; }

 private:
  ErrorCode code_;
  std::optional<SourceSpan> span_;
};

}  // namespace lud
