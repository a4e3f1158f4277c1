#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "affine/model.hpp"
#include "affine/riccati.hpp"

namespace affine {

/// exp(psi0(t,u) + psi(t,u)^T x).
struct FiniteValue {
  Complex value;
  Complex psi0;
  CVec psi;
};
/// Real u past its explosion time: E_x exp(u^T X_t) = infinity.
struct Explosive {
  double t_inf = 0.0;
};
/// Non-real u in U at or past its explosion time: E_x exp(u^T X_t) = 0.
struct ZeroRegion {
  double t_inf = 0.0;
};
struct Unknown {
  std::string diagnostic;
};

using TransformValue = std::variant<FiniteValue, Explosive, ZeroRegion, Unknown>;

const char* verdict_name(const TransformValue& v);

/// E_x exp(u^T X_t) with the domain semantics of the affine transform formula.
TransformValue transform(const AffineModel& model, const CVec& u, const Vec& x, double t,
                         const SolverConfig& cfg = {});

struct RayProbePoint {
  double lambda = 0.0;
  bool exploded = false;
  /// Blow-up estimate when exploded, +infinity otherwise.
  double t_inf_estimate = std::numeric_limits<double>::infinity();
};

struct RayProbe {
  Vec direction;
  double horizon = 0.0;
  /// inf{lambda >= 0 : t_inf(lambda * direction) <= horizon}, +infinity if none up to lambda_max.
  double lambda_star = std::numeric_limits<double>::infinity();
  double bracket_width = 0.0;
  std::vector<RayProbePoint> probes;
};

RayProbe effective_domain_ray(const AffineModel& model, const Vec& direction, double horizon,
                              double lambda_max, const SolverConfig& cfg = {});

/// b^n = b + int z (e^{-|z|^2/n} - 1) K(x, dz), K^n = e^{-|z|^2/n} K, applied per atom.
AffineModel damped_model(const AffineModel& model, int n);

struct DampedSequence {
  std::vector<int> n_list;
  std::vector<Complex> values;
  /// |values[k+1] - values[k]|.
  std::vector<double> cauchy;
  /// Present when every K^i has all exponential moments, so the undamped transform exists.
  std::optional<Complex> undamped;
  std::vector<double> distance_to_undamped;
};

DampedSequence damped_transform_sequence(const AffineModel& model, const CVec& u, const Vec& x,
                                         double t, const std::vector<int>& n_list,
                                         const SolverConfig& cfg = {});

/// Parameter set (a^i, n A^i, (1/n) K^i(dz / n)): atoms (w, z) -> (w / n, n z).
AffineModel scaled_model(const AffineModel& model, int n);

/// max |psi_scaled(t, u) - psi(t, n u) / n| over all components including psi0.
double infinite_divisibility_check(const AffineModel& model, const CVec& u, double t, int n,
                                   const SolverConfig& cfg = {});

}  // namespace affine
