// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "affine/cone.hpp"
#include "affine/error.hpp"
#include "affine/io.hpp"
#include "affine/model.hpp"
#include "affine/riccati.hpp"
#include "affine/simulate.hpp"
#include "affine/transform.hpp"

using namespace affine;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

AffineModel golden(const std::string& name) {
  return load_model(std::string(AFFINE_MODELS_DIR) + "/" + name + ".json");
}

const std::vector<std::string> kGolden = {"cir", "ou", "compound_poisson", "orthant_2d", "wishart_2d", "lorentz"};

Vec start_point(const std::string& name) {
  if (name == "ou") return Vec::Constant(1, 0.5);
  if (name == "orthant_2d") return Vec::Ones(2);
  if (name == "wishart_2d") return (Vec(3) << 1.0, 0.0, 1.0).finished();
  if (name == "lorentz") return (Vec(3) << 2.0, 0.0, 0.0).finished();
  return Vec::Ones(1);
}

std::string fmt(double v);

std::string cfmt(Complex z) {
  std::ostringstream ss;
  ss << z.real() << (z.imag() < 0.0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return ss.str();
}

CVec c1(Complex u) { return CVec::Constant(1, u); }

double rel_err(Complex got, Complex want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// psi' = psi^2, psi0 = 0.
AffineModel square_model() {
  return AffineModel(StateSpace::canonical(1, 1), Vec::Zero(1), Mat::Zero(1, 1),
                     {Mat::Zero(1, 1), Mat::Constant(1, 1, 2.0)});
}

Outcome quadratic_example() {
  const AffineModel m = square_model();
  Outcome o;
  double worst = 0.0, worst_explosion = 0.0;
  for (double u : {-5.0, -2.0, -1.0, -0.5, 0.0, 0.25, 0.5, 1.0, 2.0, 5.0}) {
    for (double frac : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double t = u > 0.0 ? 0.95 * frac / u : 10.0 * frac;
      const RiccatiSolution s = solve_riccati(m, c1(u), t);
      if (!s.solved()) {
        o.pass = false;
        o.detail += "unsolved at u=" + fmt(u) + " ";
        continue;
      }
      worst = std::max(worst, rel_err(s.terminal_psi()(0), u / (1.0 - u * t)));
      worst = std::max(worst, std::abs(s.terminal_psi0()));
    }
  }
  for (double u : {0.5, 1.0, 2.0, 5.0}) {
    const ExplosionTime e = explosion_time(m, c1(u), 10.0);
    if (const auto* f = std::get_if<FiniteExplosion>(&e))
      worst_explosion = std::max(worst_explosion, std::abs(f->estimate - 1.0 / u));
    else
      worst_explosion = INFINITY;
  }
  bool horizon_ok = true;
  for (double u : {0.0, -0.5, -1.0, -3.0}) {
    const ExplosionTime e = explosion_time(m, c1(u), 10.0);
    const auto* h = std::get_if<ExceedsHorizon>(&e);
    horizon_ok = horizon_ok && h != nullptr && h->t_max == 10.0;
  }
  o.pass = o.pass && worst < 1e-8 && worst_explosion < 1e-6 && horizon_ok;
  o.detail += "max rel err " + fmt(worst) + ", explosion err " + fmt(worst_explosion) +
              (horizon_ok ? ", u<=0 exceeds horizon" : ", u<=0 verdict wrong");
  return o;
}

Outcome closed_forms() {
  double worst = 0.0;
  const AffineModel cir = golden("cir");
  for (Complex u : {Complex(0.5), Complex(-1.0), Complex(0.0, 1.0), Complex(-0.5, 2.0), Complex(0.9)}) {
    for (double t : {0.3, 1.0}) {
      const RiccatiSolution s = solve_riccati(cir, c1(u), t);
      if (!s.solved()) return {false, "cir unsolved"};
      worst = std::max(worst, rel_err(s.terminal_psi0(), -std::log(1.0 - u * t)));
      worst = std::max(worst, rel_err(s.terminal_psi()(0), u / (1.0 - u * t)));
    }
  }
  // ou: a0 = 0.5, a = -1, A0 = 0.25
  const AffineModel ou = golden("ou");
  for (Complex u : {Complex(0.7), Complex(-1.2), Complex(0.0, 2.0), Complex(0.4, -0.9)}) {
    for (double t : {0.5, 1.5}) {
      const RiccatiSolution s = solve_riccati(ou, c1(u), t);
      const Complex psi = u * std::exp(-t);
      const Complex psi0 = 0.5 * u * (1.0 - std::exp(-t)) + 0.0625 * u * u * (1.0 - std::exp(-2.0 * t));
      worst = std::max({worst, rel_err(s.terminal_psi()(0), psi), rel_err(s.terminal_psi0(), psi0)});
    }
  }
  // compound Poisson: a0 = 1.2, K0 atoms (1.0 at 0.5) and (0.5 at 1.0)
  const AffineModel cp = golden("compound_poisson");
  for (Complex u : {Complex(0.3), Complex(-1.0), Complex(0.0, 1.0), Complex(0.5, -3.0)}) {
    for (double t : {0.5, 1.0}) {
      const RiccatiSolution s = solve_riccati(cp, c1(u), t);
      const Complex jump = 1.0 * (std::exp(0.5 * u) - 1.0 - 0.5 * u) + 0.5 * (std::exp(u) - 1.0 - u);
      worst = std::max({worst, rel_err(s.terminal_psi()(0), u), rel_err(s.terminal_psi0(), t * (1.2 * u + jump))});
    }
  }
  return {worst < 1e-8, "max rel err " + fmt(worst)};
}

Outcome mc_agreement() {
  Outcome o;
  const std::vector<Complex> panel = {Complex(0.3), Complex(-1.0), Complex(0.0, 0.5), Complex(0.0, 1.0)};
  double worst = 0.0;
  for (const std::string name : {"cir", "compound_poisson"}) {
    const AffineModel m = golden(name);
    const Vec x0 = start_point(name);
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.horizon = 1.0;
    cfg.seed = 20240601;
    cfg.n_checkpoints = 1;
    cfg.dt = 1e-3;
    const PathEnsemble coarse = simulate_paths(m, x0, cfg);
    cfg.dt = 5e-4;
    const PathEnsemble fine = simulate_paths(m, x0, cfg);
    for (Complex u : panel) {
      const MCEstimate a = mc_transform(coarse, c1(u));
      const MCEstimate b = mc_transform(fine, c1(u));
      const Complex exact = std::get<FiniteValue>(transform(m, c1(u), x0, 1.0)).value;
      const double C = 2.0 * std::abs(a.value - b.value) / 1e-3;
      const double bound = 3.0 * a.std_error + C * 1e-3;
      const double gap = std::abs(a.value - exact);
      worst = std::max(worst, gap / bound);
      if (!(gap <= bound)) {
        o.pass = false;
        std::ostringstream ss;
        ss << name << " u=" << cfmt(u) << " gap " << fmt(gap) << " > " << fmt(bound) << "; ";
        o.detail += ss.str();
      }
    }
  }
  o.detail += "max gap/bound " + fmt(worst);
  return o;
}

Outcome martingale() {
  Outcome o;
  double worst = 0.0;
  for (const std::string& name : kGolden) {
    const AffineModel m = golden(name);
    SimConfig cfg;
    cfg.n_paths = 100000;
    cfg.dt = 1e-3;
    cfg.seed = 77;
    const MartingaleDiagnostic d =
        martingale_diagnostic(m, CVec::Constant(m.dim(), Complex(0.5)), start_point(name), 0.5, 10, cfg);
    worst = std::max(worst, d.max_standardized_drift);
    if (!(d.max_standardized_drift < 4.0)) {
      o.pass = false;
      o.detail += name + " drift " + fmt(d.max_standardized_drift) + "; ";
    }
  }
  o.detail += "max standardized drift " + fmt(worst);
  return o;
}

Outcome variation_of_constants() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  int draws = 0;
  while (draws < 50) {
    const std::string& name = kGolden[static_cast<std::size_t>(draws) % kGolden.size()];
    const AffineModel m = golden(name);
    Vec u(m.dim());
    for (int i = 0; i < m.dim(); ++i) u(i) = 1.2 * unif(rng) - 0.8;
    const Vec x = m.state_space().sample_interior(rng);
    const double t = 0.1 + 1.4 * unif(rng);
    if (!solve_riccati(m, u.cast<Complex>(), t).solved()) continue;
    worst = std::max(worst, variation_of_constants_residual(m, u, x, t));
    ++draws;
  }
  return {worst < 1e-6, "max residual " + fmt(worst) + " over 50 draws"};
}

Outcome flow_identity() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (const std::string& name : kGolden) {
    const AffineModel m = golden(name);
    int draws = 0;
    while (draws < 100) {
      const Vec re = -0.5 * m.state_space().sample_interior(rng);
      CVec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = Complex(re(i), nd(rng));
      const double s = unif(rng), t = unif(rng);
      if (!solve_riccati(m, u, s + t).solved()) continue;
      worst = std::max(worst, flow_identity_residual(m, u, s, t));
      ++draws;
    }
  }
  return {worst < 1e-7, "max residual " + fmt(worst) + " over 600 draws"};
}

Outcome damping() {
  Outcome o;
  const AffineModel m = golden("compound_poisson");
  for (Complex u : {Complex(-1.0, 2.0), Complex(0.0, 1.0), Complex(-0.5, -3.0), Complex(-2.0)}) {
    const DampedSequence seq = damped_transform_sequence(m, c1(u), Vec::Ones(1), 1.0, {10, 100, 1000});
    if (!seq.undamped) return {false, "undamped transform missing"};
    const auto& d = seq.distance_to_undamped;
    const bool bound = d[2] < 10.0 * d[1];
    const bool mono = d[0] > d[1] && d[1] > d[2] && seq.cauchy[0] > seq.cauchy[1];
    o.pass = o.pass && bound && mono;
    std::ostringstream ss;
    ss << (o.detail.empty() ? "" : "; ") << "u=" << cfmt(u) << ": " << fmt(d[0]) << ", " << fmt(d[1]) << ", "
       << fmt(d[2]);
    o.detail += ss.str();
  }
  return o;
}

Outcome divisibility() {
  double worst = 0.0;
  for (const std::string name : {"cir", "ou"}) {
    const AffineModel m = golden(name);
    for (int n : {2, 5, 10})
      for (Complex u : {Complex(-0.5, 1.0), Complex(0.0, 2.0), Complex(-1.5), Complex(0.05)})
        worst = std::max(worst, infinite_divisibility_check(m, c1(u), 1.0, n));
  }
  return {worst < 1e-8, "max residual " + fmt(worst)};
}

Outcome cones() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const std::string name : {"orthant_2d", "wishart_2d"}) {
    const AffineModel m = golden(name);
    int mono = 0, inner = 0;
    for (int k = 0; k < 100; ++k) {
      const Vec v = -m.state_space().sample_interior(rng);
      const Vec u = v - m.state_space().sample_interior(rng);
      mono += monotonicity_check(m, u, v, 1.0).pass;
      CVec w = (-m.state_space().sample_interior(rng)).cast<Complex>();
      for (int i = 0; i < w.size(); ++i) w(i) += Complex(0.0, nd(rng));
      inner += interior_preservation_check(m, w, 2.0).pass;
    }
    o.pass = o.pass && mono == 100 && inner == 100;
    o.detail += name + " monotone " + std::to_string(mono) + "/100, interior " + std::to_string(inner) + "/100; ";
  }
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::string& name = kGolden[static_cast<std::size_t>(k) % kGolden.size()];
    const AffineModel m = golden(name);
    CVec u(m.dim());
    for (int i = 0; i < m.dim(); ++i) u(i) = Complex(0.0, 2.0 * nd(rng));
    const Vec x = m.state_space().sample_interior(rng);
    const TransformValue tv = transform(m, u, x, 0.1 + 2.0 * unif(rng));
    const auto* f = std::get_if<FiniteValue>(&tv);
    worst = std::max(worst, f ? std::abs(f->value) : INFINITY);
  }
  o.pass = o.pass && worst <= 1.0 + 1e-9;
  o.detail += "max |transform(iy)| " + fmt(worst);
  return o;
}

Outcome negative_fixture() {
  const AdmissibilityReport rep = check_admissibility(golden("nonadmissible_2d"), 200, 1);
  const bool ok = !rep.pass && rep.min_eigen_c < 0.0 && rep.min_eigen_point.norm() > 0.0;
  std::ostringstream ss;
  ss << "min_eigen_c " << fmt(rep.min_eigen_c) << " at x=(" << rep.min_eigen_point.transpose() << ")";
  return {ok, ss.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "scalar quadratic example", 1.0, quadratic_example},
      {2, "closed-form oracles", 1.0, closed_forms},
      {3, "MC vs ODE transform", 60.0, mc_agreement},
      {4, "martingale diagnostic", 60.0, martingale},
      {5, "variation of constants", 10.0, variation_of_constants},
      {6, "flow semigroup identity", 10.0, flow_identity},
      {7, "damping convergence", 5.0, damping},
      {8, "infinite divisibility scaling", 5.0, divisibility},
      {9, "cone properties", 30.0, cones},
      {10, "negative fixture", 0.0, negative_fixture},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    const std::string budget = c.budget_s == 0.0 ? "" : " of " + fmt(c.budget_s) + "s";
    std::printf("criterion %2d %s: %s (%s; %.2fs%s%s)\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs, budget.c_str(), in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
