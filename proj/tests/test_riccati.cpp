#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "affine/error.hpp"
#include "affine/riccati.hpp"
#include "support.hpp"

using namespace affine;
using namespace support;

namespace {

/// Classical RK4 for x' = a0 + a x.
Vec rk4_flow(const AffineModel& m, const Vec& x, double t, int n = 4000) {
  Vec y = x;
  const double h = t / n;
  auto f = [&](const Vec& z) -> Vec { return m.a0() + m.a() * z; };
  for (int k = 0; k < n; ++k) {
    const Vec k1 = f(y);
    const Vec k2 = f(y + 0.5 * h * k1);
    const Vec k3 = f(y + 0.5 * h * k2);
    const Vec k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

/// OU: psi = u e^{-kt}, psi0 = theta u (1 - e^{-kt}) + s2 u^2 (1 - e^{-2kt}) / (4k).
std::pair<Complex, Complex> ou_closed(Complex u, double t) {
  const double k = 1.0, a0 = 0.5, s2 = 0.25;
  return {a0 * u * (1.0 - std::exp(-k * t)) / k + s2 * u * u * (1.0 - std::exp(-2 * k * t)) / (4 * k),
          u * std::exp(-k * t)};
}

}  // namespace

TEST_CASE("riccati_rhs examples") {
  const CVec r0 = riccati_rhs(golden("orthant_2d"), CVec::Zero(2));
  CHECK(r0.size() == 3);
  CHECK(r0.cwiseAbs().maxCoeff() == 0.0);

  const CVec r = riccati_rhs(square(), c1(3.0));
  CHECK(r(0) == Complex(0.0));
  CHECK(r(1) == Complex(9.0));

  const CVec c = riccati_rhs(cir(), c1(2.0));
  CHECK(c(0) == Complex(2.0));
  CHECK(c(1) == Complex(4.0));

  CHECK_THROWS_AS(riccati_rhs(cir(), CVec::Zero(2)), Error);
}

TEST_CASE("solve_riccati examples") {
  const RiccatiSolution s = solve_riccati(square(), c1(1.0), 0.5);
  CHECK(s.solved());
  CHECK(std::abs(s.terminal_psi()(0) - 2.0) < 1e-9);
  CHECK(std::abs(s.terminal_psi0()) == 0.0);

  const RiccatiSolution z = solve_riccati(golden("orthant_2d"), CVec::Zero(2), 3.0);
  CHECK(z.solved());
  for (std::size_t k = 0; k < z.grid().size(); ++k) {
    CHECK(z.psi()[k].cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.psi0()[k] == Complex(0.0));
  }

  const RiccatiSolution c = solve_riccati(cir(), c1(0.5), 1.0);
  CHECK(std::abs(c.terminal_psi()(0) - 1.0) < 1e-9);
  CHECK(std::abs(c.terminal_psi0() - std::log(2.0)) < 1e-9);

  CHECK_THROWS_AS(solve_riccati(cir(), c1(0.5), 0.0), Error);
}

TEST_CASE("solution starts exactly at (0, u) with an increasing grid") {
  CVec u(2);
  u << Complex(-0.3, 1.0), Complex(-0.2, -0.5);
  const RiccatiSolution s = solve_riccati(golden("orthant_2d"), u, 2.0);
  CHECK(s.psi().front() == u);
  CHECK(s.psi0().front() == Complex(0.0));
  for (std::size_t k = 1; k < s.grid().size(); ++k) CHECK(s.grid()[k] > s.grid()[k - 1]);
  const auto [p0, p] = s.at(0.0);
  CHECK(p0 == Complex(0.0));
  CHECK(p == u);
}

TEST_CASE("explosion_time examples") {
  const auto one = explosion_time(square(), c1(1.0), 10.0);
  REQUIRE(std::holds_alternative<FiniteExplosion>(one));
  const auto& f1 = std::get<FiniteExplosion>(one);
  CHECK(std::abs(f1.estimate - 1.0) < 1e-8);
  CHECK(f1.lo <= 1.0);
  CHECK(f1.hi >= 1.0);

  const auto neg = explosion_time(square(), c1(-1.0), 10.0);
  REQUIRE(std::holds_alternative<ExceedsHorizon>(neg));
  CHECK(std::get<ExceedsHorizon>(neg).t_max == 10.0);

  const auto two = explosion_time(square(), c1(2.0), 10.0);
  REQUIRE(std::holds_alternative<FiniteExplosion>(two));
  CHECK(std::abs(std::get<FiniteExplosion>(two).estimate - 0.5) < 5e-9);
}

TEST_CASE("exploded verdict brackets the radius crossing") {
  SolverConfig cfg;
  const RiccatiSolution s = solve_riccati(square(), c1(2.0), 3.0, cfg);
  REQUIRE_FALSE(s.solved());
  const auto& e = std::get<Exploded>(s.verdict());
  CHECK(e.t_lo < e.t_hi);
  CHECK(e.t_hi - e.t_lo <= cfg.explosion_bracket_tol * e.t_hi);
  CHECK(s.terminal_psi().norm() <= cfg.r_max);
  // psi = 2 / (1 - 2t) reaches r_max at t = 0.5 - 1 / r_max
  const double crossing = 0.5 - 1.0 / cfg.r_max;
  CHECK(e.t_lo <= crossing + 1e-12);
  CHECK(e.t_hi >= crossing - 1e-12);
}

TEST_CASE("mean_flow examples") {
  CHECK(mean_flow(scalar(0, 0, 0, 0, 0), v1(3.0), 2.0)(0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(mean_flow(scalar(1.0, 0.0, 0.0, 0.0), v1(2.0), 3.0)(0) - 5.0) < 1e-13);
  const AffineModel decay = scalar(0.0, -1.0, 0.0, 0.0, 0);
  const double v = mean_flow(decay, v1(4.0), 1.0)(0);
  CHECK(std::abs(v - 4.0 * std::exp(-1.0)) < 1e-13);
  CHECK(std::abs(v - rk4_flow(decay, v1(4.0), 1.0)(0)) < 1e-12);
  CHECK(std::abs(v - 1.47152) < 1e-5);

  for (const std::string name : {"orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    std::mt19937_64 rng(3);
    const Vec x = m.state_space().sample_interior(rng);
    CHECK((mean_flow(m, x, 1.7) - rk4_flow(m, x, 1.7)).norm() < 1e-11);
  }
}

TEST_CASE("k_eval examples") {
  CHECK(k_eval(cir(), v1(1.0), v1(0.0)) == 0.0);
  const AffineModel c2 = scalar(0.0, 0.0, 2.0, 0.0, 0);
  CHECK(k_eval(c2, v1(5.0), v1(3.0)) == doctest::Approx(9.0).epsilon(1e-15));
  const AffineModel jumpy =
      scalar(1.0, 0.0, 0.0, 2.0, 1, {JumpMeasure(1), JumpMeasure::finite_atomic(1, {{1.0, v1(1.0)}})});
  CHECK(std::abs(k_eval(jumpy, v1(1.0), v1(1.0)) - (1.0 + std::numbers::e - 2.0)) < 1e-14);
}

TEST_CASE("flow_identity_residual examples") {
  CHECK(flow_identity_residual(golden("orthant_2d"), (CVec(2) << -0.5, 0.3).finished(), 0.0, 0.8) < 1e-15);
  CHECK(flow_identity_residual(square(), c1(0.5), 0.4, 0.4) < 1e-8);
  const RiccatiSolution s = solve_riccati(square(), c1(0.5), 0.8);
  CHECK(std::abs(s.terminal_psi()(0) - 0.5 / 0.6) < 1e-9);
  CHECK(flow_identity_residual(cir(), c1(0.3), 0.5, 0.7) < 1e-8);
  CHECK_THROWS_AS(flow_identity_residual(square(), c1(1.0), 0.6, 0.6), Error);
}

TEST_CASE("variation_of_constants_residual examples") {
  CHECK(variation_of_constants_residual(golden("orthant_2d"), Vec::Zero(2), (Vec(2) << 1, 2).finished(), 1.0) <
        1e-15);
  const AffineModel drift(StateSpace::canonical(0, 2), (Vec(2) << 0.3, -0.1).finished(),
                          (Mat(2, 2) << -0.5, 0.2, 0.1, -0.7).finished(),
                          {Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2)});
  CHECK(variation_of_constants_residual(drift, (Vec(2) << 0.4, -1.1).finished(), (Vec(2) << 1, 2).finished(),
                                        1.3) < 1e-10);
  // left side: log 2 + 1 from the closed form
  const RiccatiSolution s = solve_riccati(cir(), c1(0.5), 1.0);
  CHECK(std::abs((s.terminal_psi0() + s.terminal_psi()(0)).real() - (std::log(2.0) + 1.0)) < 1e-9);
  CHECK(variation_of_constants_residual(cir(), v1(0.5), v1(1.0), 1.0) < 1e-7);
}

TEST_CASE("closed forms: OU and compound Poisson") {
  const AffineModel ou = golden("ou");
  for (Complex u : {Complex(0.7), Complex(-1.2), Complex(0.0, 2.0), Complex(0.4, -0.9)}) {
    const RiccatiSolution s = solve_riccati(ou, c1(u), 1.5);
    const auto [p0, p] = ou_closed(u, 1.5);
    CHECK(std::abs(s.terminal_psi0() - p0) < 1e-9);
    CHECK(std::abs(s.terminal_psi()(0) - p) < 1e-9);
  }
  const AffineModel cp = golden("compound_poisson");
  for (Complex u : {Complex(0.3), Complex(-1.0), Complex(0.0, 1.0)}) {
    const RiccatiSolution s = solve_riccati(cp, c1(u), 1.0);
    const Complex jump = 1.0 * (std::exp(0.5 * u) - 1.0 - 0.5 * u) + 0.5 * (std::exp(u) - 1.0 - u);
    CHECK(std::abs(s.terminal_psi()(0) - u) < 1e-12);
    CHECK(std::abs(s.terminal_psi0() - (1.2 * u + jump)) < 1e-9);
  }
}

TEST_CASE("real initial conditions stay real and conjugation commutes with the flow") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const std::string name : {"cir", "ou", "compound_poisson", "orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    for (int k = 0; k < 10; ++k) {
      CVec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = Complex(-std::abs(unif(rng)), 2.0 * unif(rng));
      const RiccatiSolution real = solve_riccati(m, u.real().cast<Complex>(), 1.0);
      double imag = 0.0;
      for (std::size_t j = 0; j < real.grid().size(); ++j)
        imag = std::max({imag, std::abs(real.psi0()[j].imag()), real.psi()[j].imag().cwiseAbs().maxCoeff()});
      CHECK(imag < 1e-12);

      const RiccatiSolution a = solve_riccati(m, u, 1.0);
      const RiccatiSolution b = solve_riccati(m, u.conjugate(), 1.0);
      CHECK(std::abs(a.terminal_psi0() - std::conj(b.terminal_psi0())) < 1e-9);
      CHECK((a.terminal_psi() - b.terminal_psi().conjugate()).norm() < 1e-9);
    }
  }
}

TEST_CASE("domains are nested in the horizon") {
  for (double u : {0.5, 1.5, 3.0}) {
    const double t2 = 0.9 / u;
    REQUIRE(solve_riccati(cir(), c1(u), t2).solved());
    for (double frac : {0.1, 0.5, 0.99}) CHECK(solve_riccati(cir(), c1(u), frac * t2).solved());
  }
}

TEST_CASE("halving rel_tol changes the terminal value by less than 10x the tolerance") {
  for (const std::string name : {"cir", "orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    CVec u = CVec::Constant(m.dim(), Complex(-0.4, 0.8));
    if (name == "wishart_2d") u(1) = Complex(0.1, 0.3);
    SolverConfig c1cfg, c2cfg;
    c1cfg.rel_tol = 1e-8;
    c2cfg.rel_tol = 5e-9;
    const RiccatiSolution a = solve_riccati(m, u, 2.0, c1cfg);
    const RiccatiSolution b = solve_riccati(m, u, 2.0, c2cfg);
    const double scale = std::max(1.0, a.terminal_psi().norm());
    CHECK((a.terminal_psi() - b.terminal_psi()).norm() < 10.0 * c1cfg.rel_tol * scale);
  }
}

TEST_CASE("dense output satisfies the ODE at grid midpoints") {
  SolverConfig cfg;
  for (const std::string name : {"cir", "compound_poisson", "orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    const CVec u = CVec::Constant(m.dim(), Complex(-0.5, 1.5));
    const RiccatiSolution s = solve_riccati(m, u, 1.5, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < s.grid().size(); ++k) {
      const double mid = 0.5 * (s.grid()[k] + s.grid()[k + 1]);
      const CVec rhs = riccati_rhs(m, s.at(mid).second);
      const CVec d = s.derivative_at(mid);
      worst = std::max(worst, (d - rhs).norm() / std::max(1.0, rhs.norm()));
    }
    CAPTURE(name);
    CHECK(worst < 10.0 * cfg.rel_tol);
  }
}

TEST_CASE("flow identity holds to 100x rel_tol on random draws") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SolverConfig cfg;
  for (const std::string name : {"cir", "ou", "compound_poisson", "orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    for (int k = 0; k < 10; ++k) {
      CVec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = Complex(-unif(rng), 2.0 * unif(rng) - 1.0);
      const double s = unif(rng), t = unif(rng);
      CHECK(flow_identity_residual(m, u, s, t, cfg) < 100.0 * cfg.rel_tol);
    }
  }
}

TEST_CASE("variation of constants holds on random real u") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const std::string name : {"cir", "ou", "compound_poisson", "orthant_2d"}) {
    const AffineModel m = golden(name);
    for (int k = 0; k < 5; ++k) {
      Vec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = 0.8 * unif(rng) - 0.5;
      const Vec x = m.state_space().sample_interior(rng);
      CHECK(variation_of_constants_residual(m, u, x, 0.2 + unif(rng)) < 1e-9 + 100.0 * 1e-10);
    }
  }
}

TEST_CASE("solver configuration is validated") {
  SolverConfig bad;
  bad.rel_tol = 1.5;
  CHECK_THROWS_AS(solve_riccati(cir(), c1(0.1), 1.0, bad), Error);
  bad = {};
  bad.r_max = -1.0;
  CHECK_THROWS_AS(solve_riccati(cir(), c1(0.1), 1.0, bad), Error);
}

TEST_CASE("step limit is reported") {
  SolverConfig cfg;
  cfg.max_steps = 3;
  CHECK_THROWS_AS(solve_riccati(golden("wishart_2d"), CVec::Constant(3, Complex(-1.0, 5.0)), 10.0, cfg), Error);
}
