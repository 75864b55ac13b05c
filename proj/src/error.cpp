#include "cleanpovm/error.hpp"

namespace cleanpovm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::SingularSuperop: return "SingularSuperop";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ClosureViolation: return "ClosureViolation";
    case ErrorCode::ZeroElement: return "ZeroElement";
    case ErrorCode::InfeasibleRequest: return "InfeasibleRequest";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::BoundUnavailable: return "BoundUnavailable";
    case ErrorCode::NotQuasiQubit: return "NotQuasiQubit";
    case ErrorCode::SingleBlock: return "SingleBlock";
    case ErrorCode::WrongCount: return "WrongCount";
    case ErrorCode::VerdictIsClean: return "VerdictIsClean";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::EpsilonSearchFailed: return "EpsilonSearchFailed";
    case ErrorCode::NotScalar: return "NotScalar";
    case ErrorCode::SingleOutcome: return "SingleOutcome";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message,
                    std::optional<std::size_t> index) {
  std::string out(to_string(code));
  if (index) out += " (element " + std::to_string(*index + 1) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(compose(code, message, index)),
      code_(code),
      index_(index) {}

}  // namespace cleanpovm
