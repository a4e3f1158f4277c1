#pragma once

#include <random>
#include <string>
#include <variant>
#include <vector>

#include "affine/types.hpp"

namespace affine {

/// Slack used by membership tests of numerically produced points.
inline constexpr double kMembershipTol = 1e-9;

/// Half-vectorization: stacks the upper triangle row by row.
Vec vech(const Mat& sym);
Mat unvech(const Vec& v, int d);

/// Scaled half-vectorization: off-diagonal entries carry a factor sqrt(2) so that the
/// Euclidean inner product of two images equals the trace inner product of the matrices.
/// The PSD state space is expressed in these coordinates.
Vec svec(const Mat& sym);
Mat unsvec(const Vec& v, int d);

/// Side length d of the symmetric matrices whose half-vectorization has length p, or -1.
int psd_side(int p);

/// One closed half-space {x : normal . x <= offset}.
struct HalfSpace {
  Vec normal;
  double offset = 0.0;
};

/// R_+^m x R^(p-m).
struct Canonical {
  int m = 0;
};
/// Positive semi-definite d x d matrices in svec coordinates.
struct PSDCone {
  int d = 1;
};
/// {x : x_1 >= |(x_2..x_p)|}.
struct Lorentz {};
/// {x : x_1 >= |(x_2..x_p)|^2}.
struct Parabolic {};
/// Intersection of finitely many half-spaces with non-empty interior.
struct HalfSpaces {
  std::vector<HalfSpace> constraints;
};

using StateSpaceKind = std::variant<Canonical, PSDCone, Lorentz, Parabolic, HalfSpaces>;

/// A closed convex set E in R^p with non-empty interior.
class StateSpace {
 public:
  static StateSpace canonical(int m, int p);
  static StateSpace psd(int d);
  static StateSpace lorentz(int p);
  static StateSpace parabolic(int p);
  static StateSpace half_spaces(int p, std::vector<HalfSpace> constraints);

  int dim() const { return dim_; }
  const StateSpaceKind& kind() const { return kind_; }
  std::string name() const;

  bool contains(const Vec& x, double tol = kMembershipTol) const;
  bool interior(const Vec& x) const;
  /// Euclidean projection onto E.
  Vec project(const Vec& x) const;
  /// True iff sup_{x in E} Re(u)^T x < infinity.
  bool bounded_above(const CVec& u) const;

  Vec sample_interior(std::mt19937_64& rng) const;
  /// Projection of a strongly perturbed interior sample; lands on the boundary often.
  Vec sample_boundary(std::mt19937_64& rng) const;

  friend bool operator==(const StateSpace& a, const StateSpace& b);

 private:
  StateSpace(int dim, StateSpaceKind kind) : dim_(dim), kind_(std::move(kind)) {}

  int dim_ = 0;
  StateSpaceKind kind_;
  Vec anchor_;  // strictly interior point, used for HalfSpaces
};

/// Projection onto the second-order cone {x_1 >= |x_rest|}.
Vec project_lorentz(const Vec& x);

/// Nonnegative least squares min |M lambda - b|, lambda >= 0 (Lawson-Hanson).
Vec nnls(const Mat& m, const Vec& b);

}  // namespace affine
