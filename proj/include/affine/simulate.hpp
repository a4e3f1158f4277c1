#pragma once

#include <cstdint>
#include <vector>

#include "affine/model.hpp"
#include "affine/riccati.hpp"
#include "affine/types.hpp"

namespace affine {

struct SimConfig {
  int n_paths = 10000;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  /// States are stored at t = 0 and at this many equally spaced checkpoints up to the horizon.
  int n_checkpoints = 10;
  /// Euclidean projection onto E after every step.
  bool project = true;
  /// OpenMP worker count; 0 leaves the runtime default.
  int threads = 0;

  void validate() const;
};

/// Monte Carlo paths of the Euler scheme with frozen-intensity Poisson jumps.
struct PathEnsemble {
  int dim = 0;
  int n_paths = 0;
  int n_steps = 0;
  double dt = 0.0;
  std::vector<int> checkpoint_steps;
  std::vector<double> times;
  /// [checkpoint][path][coordinate], row-major.
  std::vector<double> states;
  std::vector<std::uint32_t> jump_counts;
  /// Left-point integral of the total jump intensity along each path.
  std::vector<double> integrated_intensity;
  /// sup_t |X_t|^2 over all steps of each path.
  std::vector<double> sup_sq_norm;
  std::uint64_t model_hash = 0;
  SimConfig config;

  Eigen::Map<const Vec> state(int checkpoint, int path) const {
    const auto offset = (static_cast<std::size_t>(checkpoint) * static_cast<std::size_t>(n_paths) +
                         static_cast<std::size_t>(path)) *
                        static_cast<std::size_t>(dim);
    return Eigen::Map<const Vec>(states.data() + offset, dim);
  }
  int last_checkpoint() const { return static_cast<int>(times.size()) - 1; }
};

/// Parallel over paths (OpenMP).
PathEnsemble simulate_paths(const AffineModel& model, const Vec& x0, const SimConfig& cfg);
/// Serial reference; bit-identical to simulate_paths.
PathEnsemble simulate_paths_serial(const AffineModel& model, const Vec& x0, const SimConfig& cfg);

struct MCEstimate {
  Complex value;
  double std_error = 0.0;
  int n_paths = 0;
  /// Some path produced a non-finite exp(u^T X).
  bool infinite = false;
};

MCEstimate mc_transform(const PathEnsemble& ensemble, const CVec& u);
MCEstimate mc_transform_at(const PathEnsemble& ensemble, int checkpoint, const CVec& u);

struct MartingaleDiagnostic {
  std::vector<double> times;
  std::vector<Complex> means;
  std::vector<double> std_errors;
  std::vector<double> standardized;
  Complex initial_value;
  double max_standardized_drift = 0.0;
  /// Nominal weak-order-one Euler bias scale, |M_0| * dt.
  double discretization_allowance = 0.0;
};

/// Checks that M_t = exp(psi0(T-t,u) + psi(T-t,u)^T X_t) has constant expectation in t.
/// `cfg.horizon` is overridden by T and `cfg.n_checkpoints` by n_checkpoints.
MartingaleDiagnostic martingale_diagnostic(const AffineModel& model, const CVec& u, const Vec& x0,
                                           double T, int n_checkpoints, SimConfig cfg,
                                           const SolverConfig& solver = {});

/// Empirical E sup_{t <= T} |X_t|^2.
double sup_moment(const PathEnsemble& ensemble);

}  // namespace affine
