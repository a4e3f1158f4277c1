#include "affine/error.hpp"

namespace affine {

const char* to_string(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::DimensionMismatch: return "DimensionMismatch";
    case Error::Kind::InvalidArgument: return "InvalidArgument";
    case Error::Kind::ModelFormat: return "ModelFormat";
    case Error::Kind::StateSpaceMismatch: return "StateSpaceMismatch";
    case Error::Kind::UnsupportedSpace: return "UnsupportedSpace";
    case Error::Kind::UnsupportedFamily: return "UnsupportedFamily";
    case Error::Kind::DivergentIntegral: return "DivergentIntegral";
    case Error::Kind::StepLimitExceeded: return "StepLimitExceeded";
    case Error::Kind::NonFiniteRHS: return "NonFiniteRHS";
    case Error::Kind::ExplosionBeforeHorizon: return "ExplosionBeforeHorizon";
    case Error::Kind::IntensityInfinite: return "IntensityInfinite";
    case Error::Kind::CholeskyFailure: return "CholeskyFailure";
  }
  return "Unknown";
}

}  // namespace affine
