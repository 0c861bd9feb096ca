#pragma once

#include <stdexcept>
#include <string>

namespace evenproj {

enum class ErrorKind {
  InvalidArgument,
  InconclusiveEllipticity,
  NotElliptic,
  TruncationTooSmall,
  RefineGrid,
  NearZero,
  SpectralGapViolation,
  NonCompactDifference,
  IllConditioned,
  TruncationUnstable,
  SpectralMarginTooSmall,
  NotIdempotent,
  NotEven,
  EtaResidual,
  SpectralFlowDegenerate,
  SpectralFlowMismatch,
  BoundaryNonelliptic,
  DefectiveBoundaryCondition,
  HomotopyFailure,
  ResonantMode,
  SeamDiscontinuity,
  NotModeDecomposable,
  Parse,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InconclusiveEllipticity: return "inconclusive ellipticity";
    case ErrorKind::NotElliptic: return "not elliptic";
    case ErrorKind::TruncationTooSmall: return "truncation too small";
    case ErrorKind::RefineGrid: return "refine grid";
    case ErrorKind::NearZero: return "value near zero";
    case ErrorKind::SpectralGapViolation: return "spectral gap violation";
    case ErrorKind::NonCompactDifference: return "non-compact difference";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::TruncationUnstable: return "truncation unstable";
    case ErrorKind::SpectralMarginTooSmall: return "spectral margin too small";
    case ErrorKind::NotIdempotent: return "not idempotent";
    case ErrorKind::NotEven: return "not even";
    case ErrorKind::EtaResidual: return "increase M0/K";
    case ErrorKind::SpectralFlowDegenerate: return "degenerate spectral flow";
    case ErrorKind::SpectralFlowMismatch: return "spectral flow methods disagree";
    case ErrorKind::BoundaryNonelliptic: return "boundary-nonelliptic";
    case ErrorKind::DefectiveBoundaryCondition: return "defective boundary condition";
    case ErrorKind::HomotopyFailure: return "homotopy lost ellipticity";
    case ErrorKind::ResonantMode: return "resonant mode";
    case ErrorKind::SeamDiscontinuity: return "seam discontinuity";
    case ErrorKind::NotModeDecomposable: return "not mode-decomposable";
    case ErrorKind::Parse: return "parse error";
  }
  return "unknown";
}

/// Every numerical abort in the library is reported through this type; the
/// kind lets callers (and the suite runner) distinguish refusal reasons.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace evenproj
