#include "phstab/error.hpp"

#include <utility>

namespace phstab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::OutOfInterval: return "OutOfInterval";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZSingular: return "ZSingular";
    case ErrorCode::SSingular: return "SSingular";
    case ErrorCode::DissipativityViolated: return "DissipativityViolated";
    case ErrorCode::KSingular: return "KSingular";
    case ErrorCode::MNotContraction: return "MNotContraction";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InvalidP0: return "InvalidP0";
    case ErrorCode::VSingular: return "VSingular";
    case ErrorCode::NotAGenerator: return "NotAGenerator";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::GridMisaligned: return "GridMisaligned";
    case ErrorCode::BoundaryRowSingular: return "BoundaryRowSingular";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::vector<std::string> details)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      details_(std::move(details)) {}

}  // namespace phstab
