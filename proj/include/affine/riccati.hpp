#pragma once

#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include "affine/model.hpp"
#include "affine/types.hpp"

namespace affine {

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// ||psi|| above this radius counts as explosion.
  double r_max = 1e8;
  long max_steps = 2'000'000;
  /// Relative width of the bracket around the R_max crossing.
  double explosion_bracket_tol = 1e-8;

  void validate() const;
};

struct Solved {
  double horizon = 0.0;
};

/// ||psi(t_lo)|| <= r_max, while integrating past t_hi exceeded r_max (or overflowed).
/// `estimate` extrapolates the blow-up time from the growth rate of ||psi|| at t_lo.
struct Exploded {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double estimate = 0.0;
};

using RiccatiVerdict = std::variant<Solved, Exploded>;

/// R(y) = (R_0(y), ..., R_p(y)) with R_i(y) = y^T a^i + 1/2 y^T A^i y + int (e^{y.z}-1-y.z) K^i(dz).
CVec riccati_rhs(const AffineModel& model, const CVec& y);

/// Trajectory of (psi0, psi) from psi0(0) = 0, psi(0) = u, with a dense evaluator on
/// [0, last_time()].
class RiccatiSolution {
 public:
  const CVec& u() const { return u_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<Complex>& psi0() const { return psi0_; }
  const std::vector<CVec>& psi() const { return psi_; }
  const RiccatiVerdict& verdict() const { return verdict_; }

  bool solved() const { return std::holds_alternative<Solved>(verdict_); }
  double last_time() const { return grid_.back(); }

  /// Dense (psi0(t), psi(t)) for 0 <= t <= last_time().
  std::pair<Complex, CVec> at(double t) const;
  /// Time derivative of the dense interpolant.
  CVec derivative_at(double t) const;

  Complex terminal_psi0() const { return psi0_.back(); }
  const CVec& terminal_psi() const { return psi_.back(); }

 private:
  friend class RiccatiIntegrator;
  friend RiccatiSolution solve_riccati(const AffineModel&, const CVec&, double, const SolverConfig&);

  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    CVec r1, r2, r3, r4, r5;
  };

  const Segment& segment_for(double t) const;
  static CVec dense_derivative(const Segment& s, double theta);

  CVec u_;
  std::vector<double> grid_;
  std::vector<Complex> psi0_;
  std::vector<CVec> psi_;
  std::vector<Segment> segments_;
  RiccatiVerdict verdict_ = Solved{};
};

RiccatiSolution solve_riccati(const AffineModel& model, const CVec& u, double horizon,
                              const SolverConfig& cfg = {});

struct FiniteExplosion {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
struct ExceedsHorizon {
  double t_max = 0.0;
};
using ExplosionTime = std::variant<FiniteExplosion, ExceedsHorizon>;

ExplosionTime explosion_time(const AffineModel& model, const CVec& u, double t_max,
                             const SolverConfig& cfg = {});

/// E_x X_t, the solution of x' = b(x), x(0) = x, via the exponential of the augmented
/// generator acting on (1, x).
Vec mean_flow(const AffineModel& model, const Vec& x, double t);

/// k(x, y) = 1/2 y^T c(x) y + int (e^{y.z} - 1 - y.z) K(x, dz).
double k_eval(const AffineModel& model, const Vec& x, const Vec& y);

/// max(||psi(t+s,u) - psi(t,psi(s,u))||, |psi0(t+s,u) - psi0(s,u) - psi0(t,psi(s,u))|).
double flow_identity_residual(const AffineModel& model, const CVec& u, double s, double t,
                              const SolverConfig& cfg = {});

/// |psi0(t,u) + psi(t,u)^T x - u^T E_x X_t - int_0^t k(E_x X_{t-s}, psi(s,u)) ds| for real u.
double variation_of_constants_residual(const AffineModel& model, const Vec& u, const Vec& x, double t,
                                       const SolverConfig& cfg = {});

}  // namespace affine
