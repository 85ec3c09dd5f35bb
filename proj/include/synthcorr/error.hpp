#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synthcorr {

enum class ErrorKind {
  InvalidInput,
  ZeroNormColumn,
  ConstantColumn,
  ShapeMismatch,
  RankDeficient,
  DegenerateTarget,
  InvalidCompetitor,
  InvalidConfig,
  InvalidCorrelation,
  ParseError,
  MissingColumn,
  SchemaMismatch,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so that front ends
/// can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ZeroNormColumn: return "ZeroNormColumn";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateTarget: return "DegenerateTarget";
    case ErrorKind::InvalidCompetitor: return "InvalidCompetitor";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace synthcorr
