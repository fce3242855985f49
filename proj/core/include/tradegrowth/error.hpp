#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tradegrowth {

enum class ErrorCode {
  AsymmetricTau,
  DiagonalTauNotOne,
  TauBelowOne,
  GammaDiverges,
  NonPositiveParam,
  NonFiniteValue,
  DimensionMismatch,
  MaxIterExceeded,
  DivergenceDetected,
  NotConverged,
  TauNotUniform,
  CountryMismatch,
  ZeroDiagonalFlow,
  NegativeFlow,
  SearchFailed,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

struct Issue {
  ErrorCode code;
  std::string message;
};

// Every failure raised by the library carries a machine-readable code. Validation
// failures additionally carry one Issue per violated assumption.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  explicit Error(std::vector<Issue> issues);

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  ErrorCode code_;
  std::vector<Issue> issues_;
};

}  // namespace tradegrowth
