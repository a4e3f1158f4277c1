#pragma once

#include "affine/model.hpp"
#include "affine/riccati.hpp"
#include "affine/types.hpp"

namespace affine {

/// Self-dual cone under the Euclidean inner product of its coordinates. VechPSD uses the
/// scaled half-vectorization, where the Euclidean product equals tr(X Y).
class SelfDualCone {
 public:
  enum class Kind { Orthant, VechPSD, Lorentz };

  static SelfDualCone orthant(int p);
  static SelfDualCone vech_psd(int d);
  static SelfDualCone lorentz(int p);
  /// Canonical(p, p), PSDCone and Lorentz state spaces; anything else is UnsupportedSpace.
  static SelfDualCone from_state_space(const StateSpace& space);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  double inner(const Vec& x, const Vec& y) const { return x.dot(y); }
  /// Signed interior margin: nonnegative iff x is in the cone, positive iff interior.
  double margin(const Vec& x) const;
  bool contains(const Vec& x, double tol = 0.0) const { return margin(x) >= -tol; }
  bool interior(const Vec& x) const { return margin(x) > 0.0; }
  Vec project(const Vec& x) const;
  double distance(const Vec& x) const { return (x - project(x)).norm(); }

  /// Analytic function positive on the interior and zero on the boundary.
  double phi(const Vec& x) const;
  /// Homogeneity degree of phi.
  int phi_degree() const;

 private:
  SelfDualCone(Kind kind, int dim, int side) : kind_(kind), dim_(dim), side_(side) {}
  Kind kind_;
  int dim_;
  int side_;
};

/// u <= v iff v - u is in the cone.
bool cone_leq(const SelfDualCone& cone, const Vec& u, const Vec& v, double tol = 0.0);
double boundary_phi(const SelfDualCone& cone, const Vec& x);

struct OrderCheck {
  bool pass = false;
  /// min over the time grid of psi0(t,v) - psi0(t,u).
  double min_psi0_gap = 0.0;
  /// max over the time grid of dist(psi(t,v) - psi(t,u), E).
  double max_cone_slack = 0.0;
  double tolerance = 0.0;
};

/// psi0(t,u) <= psi0(t,v) and psi(t,u) <= psi(t,v) on a time grid, for u <= v in -E.
OrderCheck monotonicity_check(const AffineModel& model, const Vec& u, const Vec& v, double t,
                              const SolverConfig& cfg = {}, int n_grid = 20);

struct InteriorCheck {
  bool pass = false;
  bool exploded = false;
  /// min over the grid of margin(-Re psi(s, u)).
  double min_margin = 0.0;
};

/// Re psi(s, u) stays in -int(E) and no explosion occurs on [0, t], for Re u in -int(E).
InteriorCheck interior_preservation_check(const AffineModel& model, const CVec& u, double t,
                                          const SolverConfig& cfg = {}, int n_grid = 20);

/// (K^1(L_u), ..., K^p(L_u)) in the interior of E, L_u = {z : u^T z not in 2 pi Z}.
bool regularity_Lu_check(const AffineModel& model, const Vec& u);

}  // namespace affine
