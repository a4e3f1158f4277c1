#pragma once

#include <variant>
#include <vector>

#include "affine/types.hpp"

namespace affine {

/// A point mass `weight * delta_z`. Weights may be negative inside a K^i; only the
/// combined measure K(x, .) has to be nonnegative.
struct Atom {
  double weight = 0.0;
  Vec z;
};

struct FiniteAtomic {
  std::vector<Atom> atoms;
};

/// mass * rate * exp(-rate s) ds along z = s * direction, s > 0.
struct ExponentialRay {
  double mass = 0.0;
  double rate = 1.0;
  Vec direction;
};

/// Quadrature representation: nodes z_j with weights w_j (density times quadrature weight).
struct TabulatedDensity {
  std::vector<Atom> nodes;
};

using JumpFamily = std::variant<FiniteAtomic, ExponentialRay, TabulatedDensity>;

class JumpMeasure {
 public:
  JumpMeasure() = default;
  explicit JumpMeasure(int dim) : dim_(dim), family_(FiniteAtomic{}) {}

  static JumpMeasure finite_atomic(int dim, std::vector<Atom> atoms);
  static JumpMeasure exponential_ray(int dim, double mass, double rate, Vec direction);
  static JumpMeasure tabulated(int dim, std::vector<Atom> nodes);
  /// Density f(s) along z = s * direction on an increasing grid; weights from the trapezoid rule.
  static JumpMeasure tabulated_ray(const Vec& direction, const std::vector<double>& grid,
                                   const std::vector<double>& density);

  int dim() const { return dim_; }
  const JumpFamily& family() const { return family_; }
  bool empty() const;

  /// int (e^{y.z} - 1 - y.z) dK. Throws DivergentIntegral outside the convergence region.
  Complex exp_moment(const CVec& y) const;

  /// int (|z|^2 ^ |z|) |K|(dz), in closed form.
  double truncated_moment() const;

  /// True iff int_{|z|>1} e^{k.z} |K|(dz) < infinity for every k.
  bool has_all_exponential_moments() const;

  /// Tabulated only: the last node's integrand exceeds 1e-8 of the total.
  bool grid_tail_flag(const CVec& y) const;

  friend bool operator==(const JumpMeasure& a, const JumpMeasure& b);

 private:
  JumpMeasure(int dim, JumpFamily family) : dim_(dim), family_(std::move(family)) {}

  int dim_ = 0;
  JumpFamily family_ = FiniteAtomic{};
};

/// e^q - 1 - q without cancellation for small |q|.
Complex exp_remainder(Complex q);

/// Free-function form of JumpMeasure::exp_moment.
Complex exp_moment_integral(const JumpMeasure& measure, const CVec& y);

}  // namespace affine
