#include "legalstyle/error.hpp"

namespace legalstyle {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::SectionSplit: return "SectionSplitError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::CatalogMismatch: return "CatalogMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::Protocol: return "ProtocolError";
    case ErrorCode::DegradationRejected: return "DegradationRejected";
    case ErrorCode::RestorationRejected: return "RestorationRejected";
    case ErrorCode::SynthesisFailed: return "SynthesisFailed";
    case ErrorCode::InvalidEmphasis: return "InvalidEmphasis";
    case ErrorCode::IdentifyParse: return "IdentifyParseError";
    case ErrorCode::EmptyPools: return "EmptyPools";
    case ErrorCode::IndexBuild: return "IndexBuildError";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::JudgeParse: return "JudgeParseError";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::UndefinedAgreement: return "UndefinedAgreement";
    case ErrorCode::UndefinedCV: return "UndefinedCV";
    case ErrorCode::Alignment: return "AlignmentError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::Locked: return "Locked";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace legalstyle
