#pragma once

#include <stdexcept>
#include <string>

namespace affine {

/// Base for every failure raised by the library. The CLI maps `Kind` onto exit codes.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    DimensionMismatch,
    InvalidArgument,
    ModelFormat,
    StateSpaceMismatch,
    UnsupportedSpace,
    UnsupportedFamily,
    DivergentIntegral,
    StepLimitExceeded,
    NonFiniteRHS,
    ExplosionBeforeHorizon,
    IntensityInfinite,
    CholeskyFailure,
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  /// Validation-type failures (bad input) as opposed to numeric failures.
  bool is_validation() const noexcept {
    return kind_ == Kind::DimensionMismatch || kind_ == Kind::InvalidArgument ||
           kind_ == Kind::ModelFormat ||
           kind_ == Kind::StateSpaceMismatch;
  }

 private:
  Kind kind_;
};

const char* to_string(Error::Kind kind);

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(Error::Kind::DimensionMismatch, std::string(what) + ": expected length " +
                                                    std::to_string(want) + ", got " +
                                                    std::to_string(got));
  }
}

}  // namespace affine
