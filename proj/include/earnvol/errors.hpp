#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace earnvol {

enum class ErrorKind {
  Parse,
  InvalidArgument,
  NotATradingDay,
  OutOfRange,
  DegenerateVariance,
  InsufficientFutureData,
  InsufficientHistory,
  MissingPrices,
  DataConflict,
  EmptyInput,
  SingularDesign,
  RaggedDimension,
  KeyMismatch,
  Config,
};

std::string_view to_string(ErrorKind kind);

// Every failure surfaced by the library carries a kind so callers (the CLI,
// the experiment driver) can decide between dropping a unit of work and
// aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace earnvol
