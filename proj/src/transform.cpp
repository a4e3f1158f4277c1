#include "affine/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affine/error.hpp"

namespace affine {

namespace {

bool is_real(const CVec& u) { return u.imag().cwiseAbs().maxCoeff() == 0.0; }

std::vector<Atom> damp_atoms(const std::vector<Atom>& atoms, int n, Vec& drift_shift) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const auto& at : atoms) {
    const double f = std::exp(-at.z.squaredNorm() / n);
    drift_shift += at.weight * (f - 1.0) * at.z;
    out.push_back(Atom{at.weight * f, at.z});
  }
  return out;
}

}  // namespace

const char* verdict_name(const TransformValue& v) {
  switch (v.index()) {
    case 0:
      return "finite";
    case 1:
      return "explosive";
    case 2:
      return "zero_region";
    default:
      return "unknown";
  }
}

TransformValue transform(const AffineModel& model, const CVec& u, const Vec& x, double t,
                         const SolverConfig& cfg) {
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(model.dim()), "u");
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(model.dim()), "x");
  if (!model.state_space().contains(x))
    throw Error(Error::Kind::StateSpaceMismatch, "x is not in the state space " + model.state_space().name());
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(Error::Kind::InvalidArgument, "t must be >= 0");
  if (t == 0.0) {
    const Complex e = (u.transpose() * x.cast<Complex>())(0);
    return FiniteValue{std::exp(e), Complex(0.0), u};
  }

  RiccatiSolution sol;
  try {
    sol = solve_riccati(model, u, t, cfg);
  } catch (const Error& e) {
    if (e.kind() != Error::Kind::DivergentIntegral) throw;
    return Unknown{std::string("divergent jump integral: ") + e.what()};
  }

  if (sol.solved()) {
    const Complex psi0 = sol.terminal_psi0();
    const CVec& psi = sol.terminal_psi();
    const Complex expo = psi0 + (psi.transpose() * x.cast<Complex>())(0);
    return FiniteValue{std::exp(expo), psi0, psi};
  }
  const auto& ex = std::get<Exploded>(sol.verdict());
  if (is_real(u)) return Explosive{ex.estimate};
  if (in_U(model.state_space(), u)) return ZeroRegion{ex.estimate};
  return Unknown{"complex u outside U exploded at t ~ " + std::to_string(ex.estimate)};
}

RayProbe effective_domain_ray(const AffineModel& model, const Vec& direction, double horizon,
                              double lambda_max, const SolverConfig& cfg) {
  require_dim(static_cast<std::size_t>(direction.size()), static_cast<std::size_t>(model.dim()),
              "direction");
  if (!(horizon > 0.0)) throw Error(Error::Kind::InvalidArgument, "ray probe needs T > 0");
  if (direction.norm() == 0.0) throw Error(Error::Kind::InvalidArgument, "ray direction must be nonzero");
  if (!(lambda_max > 0.0)) throw Error(Error::Kind::InvalidArgument, "lambda_max must be positive");

  RayProbe probe;
  probe.direction = direction;
  probe.horizon = horizon;
  auto exploded = [&](double lambda) {
    const RiccatiSolution sol = solve_riccati(model, (lambda * direction).cast<Complex>(), horizon, cfg);
    RayProbePoint pt;
    pt.lambda = lambda;
    if (const auto* e = std::get_if<Exploded>(&sol.verdict())) {
      pt.exploded = true;
      pt.t_inf_estimate = e->estimate;
    }
    probe.probes.push_back(pt);
    return pt.exploded;
  };

  if (!exploded(lambda_max)) return probe;
  double lo = 0.0;
  double hi = lambda_max;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (exploded(mid) ? hi : lo) = mid;
  }
  probe.lambda_star = 0.5 * (lo + hi);
  probe.bracket_width = hi - lo;
  return probe;
}

AffineModel damped_model(const AffineModel& model, int n) {
  if (n < 1) throw Error(Error::Kind::InvalidArgument, "damping index n must be positive");
  const int p = model.dim();
  Vec a0 = model.a0();
  Mat a = model.a();
  std::vector<JumpMeasure> k;
  for (int i = 0; i <= p; ++i) {
    const JumpMeasure& m = model.K()[static_cast<std::size_t>(i)];
    Vec shift = Vec::Zero(p);
    if (const auto* f = std::get_if<FiniteAtomic>(&m.family())) {
      k.push_back(JumpMeasure::finite_atomic(p, damp_atoms(f->atoms, n, shift)));
    } else if (const auto* t = std::get_if<TabulatedDensity>(&m.family())) {
      k.push_back(JumpMeasure::tabulated(p, damp_atoms(t->nodes, n, shift)));
    } else if (m.empty()) {
      k.push_back(JumpMeasure(p));
    } else {
      throw Error(Error::Kind::UnsupportedFamily,
                  "damped_model: exponential-ray measures have no exact damped form; tabulate first");
    }
    if (i == 0) a0 += shift;
    else a.col(i - 1) += shift;
  }
  return AffineModel(model.state_space(), a0, a, model.A(), std::move(k));
}

DampedSequence damped_transform_sequence(const AffineModel& model, const CVec& u, const Vec& x,
                                         double t, const std::vector<int>& n_list,
                                         const SolverConfig& cfg) {
  if (!in_U(model.state_space(), u))
    throw Error(Error::Kind::InvalidArgument, "damped sequence needs u in U");
  auto value_of = [](const TransformValue& v) -> Complex {
    if (const auto* f = std::get_if<FiniteValue>(&v)) return f->value;
    if (std::holds_alternative<ZeroRegion>(v)) return 0.0;
    return Complex(std::nan(""), std::nan(""));
  };

  DampedSequence seq;
  seq.n_list = n_list;
  for (int n : n_list) seq.values.push_back(value_of(transform(damped_model(model, n), u, x, t, cfg)));
  for (std::size_t k = 1; k < seq.values.size(); ++k)
    seq.cauchy.push_back(std::abs(seq.values[k] - seq.values[k - 1]));

  const auto moments = exponential_moment_condition(model);
  if (std::all_of(moments.begin(), moments.end(), [](bool b) { return b; })) {
    seq.undamped = value_of(transform(model, u, x, t, cfg));
    for (const Complex& v : seq.values) seq.distance_to_undamped.push_back(std::abs(v - *seq.undamped));
  }
  return seq;
}

AffineModel scaled_model(const AffineModel& model, int n) {
  if (n < 1) throw Error(Error::Kind::InvalidArgument, "scaling index n must be positive");
  const int p = model.dim();
  const double nd = n;
  std::vector<Mat> A = model.A();
  for (Mat& m : A) m *= nd;
  auto scale_atoms = [&](const std::vector<Atom>& atoms) {
    std::vector<Atom> out;
    for (const auto& at : atoms) out.push_back(Atom{at.weight / nd, nd * at.z});
    return out;
  };
  std::vector<JumpMeasure> k;
  for (const JumpMeasure& m : model.K()) {
    if (const auto* f = std::get_if<FiniteAtomic>(&m.family())) {
      k.push_back(JumpMeasure::finite_atomic(p, scale_atoms(f->atoms)));
    } else if (const auto* t = std::get_if<TabulatedDensity>(&m.family())) {
      k.push_back(JumpMeasure::tabulated(p, scale_atoms(t->nodes)));
    } else {
      // mass * rate * e^{-rate s} ds pushed forward by s -> n s and scaled by 1/n.
      const auto& r = std::get<ExponentialRay>(m.family());
      k.push_back(JumpMeasure::exponential_ray(p, r.mass / nd, r.rate / nd, r.direction));
    }
  }
  return AffineModel(model.state_space(), model.a0(), model.a(), std::move(A), std::move(k));
}

double infinite_divisibility_check(const AffineModel& model, const CVec& u, double t, int n,
                                   const SolverConfig& cfg) {
  const AffineModel scaled = scaled_model(model, n);
  const RiccatiSolution s = solve_riccati(scaled, u, t, cfg);
  const RiccatiSolution b = solve_riccati(model, static_cast<double>(n) * u, t, cfg);
  if (!s.solved() || !b.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "infinite divisibility check: explosion before t");
  const double nd = n;
  double r = std::abs(s.terminal_psi0() - b.terminal_psi0() / nd);
  r = std::max(r, (s.terminal_psi() - b.terminal_psi() / nd).cwiseAbs().maxCoeff());
  return r;
}

}  // namespace affine
