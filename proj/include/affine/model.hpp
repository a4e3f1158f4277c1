#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "affine/jump_measure.hpp"
#include "affine/state_space.hpp"
#include "affine/types.hpp"

namespace affine {

/// One jump shape of the combined measure K(x, .) = K^0 + sum_i x_i K^i, with its
/// state-affine intensity. Atoms at equal locations (and rays with equal rate and
/// direction) across the K^i are merged into one component.
struct JumpComponent {
  enum class Shape { Atom, Ray };
  Shape shape = Shape::Atom;
  Vec z;              // atom location, or ray direction
  double rate = 0.0;  // ray only
  Vec intensity;      // coefficients of (1, x_1, ..., x_p)

  double intensity_at(const Vec& x) const {
    return intensity(0) + intensity.tail(intensity.size() - 1).dot(x);
  }
};

/// Parameter set (a^i, A^i, K^i), i = 0..p, of an affine jump-diffusion on a state space E:
///   b(x) = a^0 + sum_i a^i x_i,  c(x) = A^0 + sum_i A^i x_i,  K(x, dz) = K^0 + sum_i x_i K^i.
/// Immutable after construction.
class AffineModel {
 public:
  /// `a` holds a^1..a^p as columns. `A` and `K` have p+1 entries; an empty `K` means no jumps.
  AffineModel(StateSpace space, Vec a0, Mat a, std::vector<Mat> A, std::vector<JumpMeasure> K = {});

  int dim() const { return space_.dim(); }
  const StateSpace& state_space() const { return space_; }
  const Vec& a0() const { return a0_; }
  const Mat& a() const { return a_; }
  const std::vector<Mat>& A() const { return A_; }
  const std::vector<JumpMeasure>& K() const { return K_; }
  bool has_jumps() const { return !components_.empty(); }
  const std::vector<JumpComponent>& jump_components() const { return components_; }

  friend bool operator==(const AffineModel& x, const AffineModel& y);

 private:
  StateSpace space_;
  Vec a0_;
  Mat a_;
  std::vector<Mat> A_;
  std::vector<JumpMeasure> K_;
  std::vector<JumpComponent> components_;
};

Vec drift_at(const AffineModel& model, const Vec& x);
Mat diffusion_at(const AffineModel& model, const Vec& x);

/// Total intensity K(x, F), clipping negative component intensities at zero.
double jump_intensity_at(const AffineModel& model, const Vec& x);

struct AdmissibilityReport {
  std::vector<Vec> sampled_points;
  double min_eigen_c = std::numeric_limits<double>::infinity();
  Vec min_eigen_point;
  /// +infinity when the model has no jumps.
  double min_jump_weight = std::numeric_limits<double>::infinity();
  std::vector<Vec> support_violations;
  double tol = 1e-10;
  bool pass = false;
};

/// Sampled admissibility check: PSD c(x), nonnegative K(x, .), and x + z in E for every
/// charged jump z, at `n_samples` points of E (alternating interior and boundary samples).
AdmissibilityReport check_admissibility(const AffineModel& model, int n_samples, std::uint64_t seed,
                                        double tol = 1e-10);

/// u in U = {u : sup_{x in E} Re u^T x < infinity}.
bool in_U(const StateSpace& space, const CVec& u);

/// FNV-1a digest of every parameter bit; equal models hash equal.
std::uint64_t model_hash(const AffineModel& model);

/// Per K^i: whether it has finite exponential moments of every order.
std::vector<bool> exponential_moment_condition(const AffineModel& model);

}  // namespace affine
