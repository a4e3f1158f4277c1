#pragma once

#include <string>

#include "affine/io.hpp"
#include "affine/model.hpp"

namespace support {

using namespace affine;

inline AffineModel golden(const std::string& name) {
  return load_model(std::string(AFFINE_MODELS_DIR) + "/" + name + ".json");
}

inline Vec v1(double a) { return Vec::Constant(1, a); }
inline CVec c1(Complex a) { return CVec::Constant(1, a); }
inline Mat m1(double a) { return Mat::Constant(1, 1, a); }

/// Scalar model on R_+ (or R when m = 0) with the given parameters.
inline AffineModel scalar(double a0, double a, double A0, double A1, int m = 1,
                          std::vector<JumpMeasure> K = {}) {
  return AffineModel(StateSpace::canonical(m, 1), v1(a0), m1(a), {m1(A0), m1(A1)}, std::move(K));
}

/// psi' = psi^2, psi0' = psi: the CIR-type model a0 = 1, A^1 = 2.
inline AffineModel cir() { return scalar(1.0, 0.0, 0.0, 2.0); }

/// psi' = psi^2 with psi0 identically zero.
inline AffineModel square() { return scalar(0.0, 0.0, 0.0, 2.0); }

/// The 2-d example with c(x) = [[x1, x2], [x2, -x1]] on R^2.
inline AffineModel indefinite_2d() {
  Mat A1(2, 2), A2(2, 2);
  A1 << 1, 0, 0, -1;
  A2 << 0, 1, 1, 0;
  return AffineModel(StateSpace::canonical(0, 2), Vec::Zero(2), Mat::Zero(2, 2), {Mat::Zero(2, 2), A1, A2});
}

}  // namespace support
