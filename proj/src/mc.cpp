#include <cmath>
#include <limits>

#include "affine/error.hpp"
#include "affine/simulate.hpp"

namespace affine {

MCEstimate mc_transform_at(const PathEnsemble& ensemble, int checkpoint, const CVec& u) {
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(ensemble.dim), "u");
  if (checkpoint < 0 || checkpoint > ensemble.last_checkpoint())
    throw Error(Error::Kind::InvalidArgument, "checkpoint index out of range");
  MCEstimate est;
  est.n_paths = ensemble.n_paths;
  // Welford accumulation of real and imaginary parts.
  double mean_re = 0.0, mean_im = 0.0, m2_re = 0.0, m2_im = 0.0;
  for (int path = 0; path < ensemble.n_paths; ++path) {
    const auto x = ensemble.state(checkpoint, path);
    Complex e = 0.0;
    for (int i = 0; i < ensemble.dim; ++i) e += u(i) * x(i);
    const Complex v = std::exp(e);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      est.infinite = true;
      est.value = Complex(std::numeric_limits<double>::infinity(), 0.0);
      est.std_error = std::numeric_limits<double>::infinity();
      return est;
    }
    const double k = path + 1.0;
    const double dre = v.real() - mean_re;
    const double dim = v.imag() - mean_im;
    mean_re += dre / k;
    mean_im += dim / k;
    m2_re += dre * (v.real() - mean_re);
    m2_im += dim * (v.imag() - mean_im);
  }
  est.value = Complex(mean_re, mean_im);
  const double n = ensemble.n_paths;
  est.std_error = n > 1 ? std::sqrt((m2_re + m2_im) / (n - 1.0) / n) : 0.0;
  return est;
}

MCEstimate mc_transform(const PathEnsemble& ensemble, const CVec& u) {
  return mc_transform_at(ensemble, ensemble.last_checkpoint(), u);
}

MartingaleDiagnostic martingale_diagnostic(const AffineModel& model, const CVec& u, const Vec& x0,
                                           double T, int n_checkpoints, SimConfig cfg,
                                           const SolverConfig& solver) {
  cfg.horizon = T;
  cfg.n_checkpoints = n_checkpoints;
  const RiccatiSolution sol = solve_riccati(model, u, T, solver);
  if (!sol.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "martingale diagnostic needs T < t_inf(u)");
  const PathEnsemble ens = simulate_paths(model, x0, cfg);

  MartingaleDiagnostic d;
  const Complex m0 = std::exp(sol.terminal_psi0() + (sol.terminal_psi().transpose() * x0.cast<Complex>())(0));
  d.initial_value = m0;
  d.discretization_allowance = std::abs(m0) * ens.dt;
  for (int k = 1; k <= ens.last_checkpoint(); ++k) {
    const double t = ens.times[static_cast<std::size_t>(k)];
    const auto [psi0, psi] = sol.at(std::max(0.0, T - t));
    double mean_re = 0.0, mean_im = 0.0, m2 = 0.0;
    for (int path = 0; path < ens.n_paths; ++path) {
      const auto x = ens.state(k, path);
      Complex e = psi0;
      for (int i = 0; i < ens.dim; ++i) e += psi(i) * x(i);
      const Complex v = std::exp(e);
      const double n = path + 1.0;
      const double dre = v.real() - mean_re;
      const double dim = v.imag() - mean_im;
      mean_re += dre / n;
      mean_im += dim / n;
      m2 += dre * (v.real() - mean_re) + dim * (v.imag() - mean_im);
    }
    const double n = ens.n_paths;
    const double se = n > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    const Complex mean(mean_re, mean_im);
    const double gap = std::abs(mean - m0);
    const double z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    d.times.push_back(t);
    d.means.push_back(mean);
    d.std_errors.push_back(se);
    d.standardized.push_back(z);
    d.max_standardized_drift = std::max(d.max_standardized_drift, z);
  }
  return d;
}

double sup_moment(const PathEnsemble& ensemble) {
  double s = 0.0;
  for (double v : ensemble.sup_sq_norm) s += v;
  return ensemble.n_paths > 0 ? s / ensemble.n_paths : 0.0;
}

}  // namespace affine
