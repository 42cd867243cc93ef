#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace legalstyle {

enum class ErrorCode {
  EmptyText,
  SectionSplit,
  InsufficientData,
  CatalogMismatch,
  DegenerateLabels,
  InvalidK,
  BackendUnavailable,
  Protocol,
  DegradationRejected,
  RestorationRejected,
  SynthesisFailed,
  InvalidEmphasis,
  IdentifyParse,
  EmptyPools,
  IndexBuild,
  ZeroVector,
  MissingPair,
  JudgeParse,
  InvalidScore,
  VersionMismatch,
  UndefinedCorrelation,
  UndefinedAgreement,
  UndefinedCV,
  Alignment,
  Config,
  Io,
  Format,
  Locked,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library. `detail()` carries optional
/// payload such as the unmatched text of a failed section split.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace legalstyle
