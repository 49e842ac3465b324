#include "did/common.hpp"

namespace did {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "UsageError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::NonBinaryIndicator: return "NonBinaryIndicator";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::InvalidFoldCount: return "InvalidFoldCount";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegeneratePath: return "DegeneratePath";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::IncompatiblePair: return "IncompatiblePair";
    case ErrorCode::EmptyTrainingCell: return "EmptyTrainingCell";
    case ErrorCode::MissingNuisance: return "MissingNuisance";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::UnsupportedPair: return "UnsupportedPair";
    case ErrorCode::SinglePeriod: return "SinglePeriod";
    case ErrorCode::Io: return "IoError";
  }
  return "UnknownError";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return 2;
    case ErrorCode::Config: return 3;
    case ErrorCode::NonBinaryIndicator:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::EmptyCell:
    case ErrorCode::EmptyGroup:
    case ErrorCode::InconsistentDimension:
    case ErrorCode::InvalidFoldCount:
    case ErrorCode::IncompatiblePair:
    case ErrorCode::UnknownTarget:
    case ErrorCode::UnsupportedPair:
    case ErrorCode::SinglePeriod:
      return 4;
    case ErrorCode::SingleClass:
    case ErrorCode::NoConvergence:
    case ErrorCode::DegeneratePath:
    case ErrorCode::DimensionOverflow:
      return 5;
    case ErrorCode::EmptyTrainingCell:
    case ErrorCode::MissingNuisance:
    case ErrorCode::DegenerateDenominator:
      return 6;
    case ErrorCode::InfeasibleSpec: return 7;
    case ErrorCode::Io: return 8;
  }
  return 1;
}

}  // namespace did
