#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phstab {

enum class ErrorCode {
  NotSymmetric,
  NearSingular,
  DimensionMismatch,
  Overflow,
  NotPositiveDefinite,
  OutOfInterval,
  InvalidArgument,
  RankDeficient,
  ZSingular,
  SSingular,
  DissipativityViolated,
  KSingular,
  MNotContraction,
  DomainViolation,
  InvalidP0,
  VSingular,
  NotAGenerator,
  NotFound,
  GridMisaligned,
  BoundaryRowSingular,
  SolveFailure,
  BudgetExceeded,
  ParseError,
  ValidationError,
  InternalConsistency,
};

std::string_view to_string(ErrorCode code);

/// Library error carrying a machine-readable code and optional detail lines.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace phstab
