#include "affine/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "affine/error.hpp"
#include "affine/quadrature.hpp"

namespace affine {

namespace {

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes c_i are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double psi_norm(const CVec& y) { return y.tail(y.size() - 1).norm(); }

}  // namespace

void SolverConfig::validate() const {
  const bool ok = rel_tol > 0.0 && rel_tol < 1.0 && abs_tol > 0.0 && r_max > 0.0 && max_steps > 0 &&
                  explosion_bracket_tol > 0.0;
  if (!ok) throw Error(Error::Kind::InvalidArgument, "solver configuration must be positive, rel_tol < 1");
}

CVec riccati_rhs(const AffineModel& model, const CVec& y) {
  const int p = model.dim();
  require_dim(static_cast<std::size_t>(y.size()), static_cast<std::size_t>(p), "riccati_rhs y");
  CVec r(p + 1);
  const CVec a0 = model.a0().cast<Complex>();
  // bilinear forms: no conjugation of y
  r(0) = (y.transpose() * a0)(0);
  r(0) += 0.5 * (y.transpose() * model.A()[0].cast<Complex>() * y)(0);
  r(0) += model.K()[0].exp_moment(y);
  for (int i = 1; i <= p; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Complex v = (y.transpose() * model.a().col(i - 1).cast<Complex>())(0);
    v += 0.5 * (y.transpose() * model.A()[ui].cast<Complex>() * y)(0);
    v += model.K()[ui].exp_moment(y);
    r(i) = v;
  }
  return r;
}

/// Accepted steps also keep the midpoint defect |y' - R(y)| of the interpolant below
/// kDefectFactor * rel_tol * max(1, |R|).
constexpr double kDefectFactor = 5.0;

/// Adaptive DOPRI5 driver over the augmented state (psi0, psi).
class RiccatiIntegrator {
 public:
  RiccatiIntegrator(const AffineModel& model, const SolverConfig& cfg) : model_(model), cfg_(cfg) {}

  enum class Stop { Reached, Exceeded };
  struct Outcome {
    Stop stop = Stop::Reached;
    double t = 0.0;
    CVec y;
    double t_fail = 0.0;
    double h_next = 0.0;
  };

  CVec rhs(const CVec& y) const { return riccati_rhs(model_, y.tail(y.size() - 1)); }

  double initial_step(const CVec& y, const CVec& f, double span) const {
    auto scaled = [&](const CVec& v) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y(i));
        s += std::norm(v(i)) / (sc * sc);
      }
      return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double d0 = scaled(y);
    const double d1n = scaled(f);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    double h1 = 0.0;
    try {
      const CVec f1 = rhs(y + h0 * f);
      const double d2 = f1.allFinite() ? scaled(f1 - f) / h0 : 1e300;
      const double m = std::max(d1n, d2);
      h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::DivergentIntegral) throw;
      h1 = h0 * 1e-3;
    }
    return std::min({100.0 * h0, h1, span});
  }

  Outcome run(double t, CVec y, double t_end, double h, RiccatiSolution& rec, long& steps) const {
    const Eigen::Index n = y.size();
    // DivergentIntegral at an accepted state propagates.
    CVec k1 = rhs(y);
    if (!k1.allFinite())
      throw Error(Error::Kind::NonFiniteRHS, "non-finite Riccati right-hand side at t = " + std::to_string(t));
    if (h <= 0.0) h = initial_step(y, k1, t_end - t);

    CVec k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), stage(n);
    bool last_fail_divergent = false;
    while (t < t_end) {
      if (++steps > cfg_.max_steps)
        throw Error(Error::Kind::StepLimitExceeded, "Riccati solver exceeded max_steps = " +
                                                        std::to_string(cfg_.max_steps));
      const bool final_step = t + h >= t_end;
      if (final_step) h = t_end - t;
      const double h_min = 1e-15 * std::max(1.0, std::abs(t));
      if (h < h_min) {
        if (last_fail_divergent)
          throw Error(Error::Kind::DivergentIntegral,
                      "jump integral diverges along the trajectory near t = " + std::to_string(t));
        return Outcome{Stop::Exceeded, t, y, t + h_min, h_min};
      }

      bool stage_ok = true;
      try {
        stage = y + h * a21 * k1;
        k2 = rhs(stage);
        stage = y + h * (a31 * k1 + a32 * k2);
        k3 = rhs(stage);
        stage = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = rhs(stage);
        stage = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = rhs(stage);
        stage = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = rhs(stage);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = rhs(ynew);
        stage_ok = k2.allFinite() && k3.allFinite() && k4.allFinite() && k5.allFinite() &&
                   k6.allFinite() && k7.allFinite() && ynew.allFinite();
        last_fail_divergent = false;
      } catch (const Error& e) {
        if (e.kind() != Error::Kind::DivergentIntegral) throw;
        stage_ok = false;
        last_fail_divergent = true;
      }
      if (!stage_ok) {
        h *= 0.25;
        continue;
      }

      double err = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Complex ei = h * (e1 * k1(i) + e3 * k3(i) + e4 * k4(i) + e5 * k5(i) + e6 * k6(i) + e7 * k7(i));
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
        err += std::norm(ei) / (sc * sc);
      }
      err = std::sqrt(err / static_cast<double>(n));

      // Defect of the dense interpolant at the step midpoint.
      RiccatiSolution::Segment seg;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = ynew - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      if (err <= 1.0) {
        try {
          const CVec ymid = seg.r1 + 0.5 * (seg.r2 + 0.5 * (seg.r3 + 0.5 * (seg.r4 + 0.5 * seg.r5)));
          const CVec fmid = rhs(ymid);
          const CVec dmid = RiccatiSolution::dense_derivative(seg, 0.5);
          const double target = kDefectFactor * cfg_.rel_tol * std::max(1.0, fmid.norm());
          const double defect = fmid.allFinite() ? (dmid - fmid).norm() / target : 1e300;
          err = std::max(err, std::pow(defect, 1.25));
        } catch (const Error& e) {
          if (e.kind() != Error::Kind::DivergentIntegral) throw;
          h *= 0.25;
          continue;
        }
      }
      const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
      if (!(err <= 1.0)) {
        h *= std::min(1.0, fac);
        continue;
      }
      if (psi_norm(ynew) > cfg_.r_max) return Outcome{Stop::Exceeded, t, y, t + h, h * 0.5};

      rec.segments_.push_back(std::move(seg));

      t = final_step ? t_end : t + h;
      y = ynew;
      k1 = k7;
      rec.grid_.push_back(t);
      rec.psi0_.push_back(y(0));
      rec.psi_.push_back(y.tail(n - 1));
      h *= fac;
    }
    return Outcome{Stop::Reached, t, y, t, h};
  }

 private:
  const AffineModel& model_;
  const SolverConfig& cfg_;
};

const RiccatiSolution::Segment& RiccatiSolution::segment_for(double t) const {
  if (segments_.empty() || t < 0.0 || t > grid_.back())
    throw Error(Error::Kind::InvalidArgument,
                "dense evaluation at t = " + std::to_string(t) + " outside [0, " +
                    std::to_string(grid_.back()) + "]");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.t0; });
  if (it != segments_.begin()) --it;
  return *it;
}

std::pair<Complex, CVec> RiccatiSolution::at(double t) const {
  if (segments_.empty()) {
    if (t == 0.0) return {Complex(0.0), u_};
    throw Error(Error::Kind::InvalidArgument, "empty Riccati solution");
  }
  const Segment& s = segment_for(t);
  const double th = std::clamp((t - s.t0) / s.h, 0.0, 1.0);
  const double th1 = 1.0 - th;
  CVec y = s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
  return {y(0), y.tail(y.size() - 1)};
}

CVec RiccatiSolution::dense_derivative(const Segment& s, double th) {
  const double th1 = 1.0 - th;
  const CVec a = s.r4 + th1 * s.r5;
  const CVec b = s.r3 + th * a;
  const CVec c = s.r2 + th1 * b;
  const CVec db = a - th * s.r5;
  const CVec dc = -b + th1 * db;
  return (c + th * dc) / s.h;
}

CVec RiccatiSolution::derivative_at(double t) const {
  const Segment& s = segment_for(t);
  return dense_derivative(s, std::clamp((t - s.t0) / s.h, 0.0, 1.0));
}

RiccatiSolution solve_riccati(const AffineModel& model, const CVec& u, double horizon,
                              const SolverConfig& cfg) {
  cfg.validate();
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(model.dim()), "u");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(Error::Kind::InvalidArgument, "horizon must be positive and finite");

  RiccatiSolution sol;
  sol.u_ = u;
  sol.grid_.push_back(0.0);
  sol.psi0_.push_back(Complex(0.0));
  sol.psi_.push_back(u);

  CVec y0(model.dim() + 1);
  y0(0) = 0.0;
  y0.tail(model.dim()) = u;

  RiccatiIntegrator integ(model, cfg);
  long steps = 0;
  auto out = integ.run(0.0, y0, horizon, 0.0, sol, steps);
  if (out.stop == RiccatiIntegrator::Stop::Reached) {
    sol.verdict_ = Solved{horizon};
    return sol;
  }

  // Bisection on the integration horizon around the r_max crossing.
  double lo = out.t;
  double hi = std::min(out.t_fail, horizon);
  CVec ylo = out.y;
  double h = out.h_next;
  for (int it = 0; it < 200 && hi - lo > cfg.explosion_bracket_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    auto sub = integ.run(lo, ylo, mid, std::min(h, mid - lo), sol, steps);
    ylo = sub.y;
    h = sub.h_next;
    if (sub.stop == RiccatiIntegrator::Stop::Reached) {
      lo = mid;
    } else {
      lo = sub.t;
      hi = std::min(hi, sub.t_fail);
    }
  }

  double estimate = hi;
  try {
    const CVec dy = integ.rhs(ylo);
    const CVec psi = ylo.tail(ylo.size() - 1);
    const CVec dpsi = dy.tail(dy.size() - 1);
    const double growth = psi.dot(dpsi).real();  // <psi, psi'> = ||psi|| d||psi||/dt
    if (dpsi.allFinite() && growth > 0.0) estimate = lo + psi.squaredNorm() / growth;
  } catch (const Error&) {
  }
  sol.verdict_ = Exploded{lo, hi, std::max(estimate, lo)};
  return sol;
}

ExplosionTime explosion_time(const AffineModel& model, const CVec& u, double t_max,
                             const SolverConfig& cfg) {
  const RiccatiSolution sol = solve_riccati(model, u, t_max, cfg);
  if (const auto* e = std::get_if<Exploded>(&sol.verdict())) {
    // For at least quadratic growth the blow-up lies within one extrapolated remaining time.
    const double upper = std::max(e->t_hi, e->estimate) + (e->t_hi - e->t_lo);
    return FiniteExplosion{e->estimate, e->t_lo, upper};
  }
  return ExceedsHorizon{t_max};
}

Vec mean_flow(const AffineModel& model, const Vec& x, double t) {
  const int p = model.dim();
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(p), "x");
  if (!(t >= 0.0)) throw Error(Error::Kind::InvalidArgument, "mean_flow needs t >= 0");
  Mat gen = Mat::Zero(p + 1, p + 1);
  gen.block(1, 0, p, 1) = model.a0();
  gen.block(1, 1, p, p) = model.a();
  Vec ext(p + 1);
  ext(0) = 1.0;
  ext.tail(p) = x;
  const Mat flow = (gen * t).exp();
  return (flow * ext).tail(p);
}

double k_eval(const AffineModel& model, const Vec& x, const Vec& y) {
  const int p = model.dim();
  require_dim(static_cast<std::size_t>(y.size()), static_cast<std::size_t>(p), "y");
  const Mat c = diffusion_at(model, x);
  const CVec yc = y.cast<Complex>();
  Complex jumps = model.K()[0].exp_moment(yc);
  for (int i = 0; i < p; ++i) {
    const auto& k = model.K()[static_cast<std::size_t>(i) + 1];
    if (!k.empty()) jumps += x(i) * k.exp_moment(yc);
  }
  return 0.5 * y.dot(c * y) + jumps.real();
}

double flow_identity_residual(const AffineModel& model, const CVec& u, double s, double t,
                              const SolverConfig& cfg) {
  if (s < 0.0 || t < 0.0) throw Error(Error::Kind::InvalidArgument, "flow identity needs s, t >= 0");
  if (s == 0.0 || t == 0.0) return 0.0;
  const RiccatiSolution whole = solve_riccati(model, u, s + t, cfg);
  const RiccatiSolution first = solve_riccati(model, u, s, cfg);
  if (!whole.solved() || !first.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "flow identity: explosion before s + t");
  const RiccatiSolution second = solve_riccati(model, first.terminal_psi(), t, cfg);
  if (!second.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "flow identity: explosion restarting from psi(s)");
  const double dpsi = (whole.terminal_psi() - second.terminal_psi()).norm();
  const double dpsi0 =
      std::abs(whole.terminal_psi0() - first.terminal_psi0() - second.terminal_psi0());
  return std::max(dpsi, dpsi0);
}

double variation_of_constants_residual(const AffineModel& model, const Vec& u, const Vec& x, double t,
                                       const SolverConfig& cfg) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(model.dim()), "x");
  if (t == 0.0) return 0.0;
  const RiccatiSolution sol = solve_riccati(model, u.cast<Complex>(), t, cfg);
  if (!sol.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "variation of constants: explosion before t");
  const double lhs = (sol.terminal_psi0() + sol.terminal_psi().cwiseProduct(x.cast<Complex>()).sum()).real();
  auto integrand = [&](double s) {
    const Vec psi = sol.at(s).second.real();
    return k_eval(model, mean_flow(model, x, t - s), psi);
  };
  const double rhs = u.dot(mean_flow(model, x, t)) + adaptive_simpson(integrand, 0.0, t, 1e-9);
  return std::abs(lhs - rhs);
}

}  // namespace affine
