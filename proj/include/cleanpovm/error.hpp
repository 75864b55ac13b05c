#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cleanpovm {

enum class ErrorCode {
  NonFinite,
  NonHermitianInput,
  NotPsd,
  SingularBasis,
  SingularSuperop,
  DimensionMismatch,
  ClosureViolation,
  ZeroElement,
  InfeasibleRequest,
  Inconclusive,
  BoundUnavailable,
  NotQuasiQubit,
  SingleBlock,
  WrongCount,
  VerdictIsClean,
  ConstructionFailed,
  PreconditionViolated,
  EpsilonSearchFailed,
  NotScalar,
  SingleOutcome,
  ParseError,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. `index` names the offending POVM
// element (0-based) when the error is element-specific.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace cleanpovm
