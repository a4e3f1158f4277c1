#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "affine/error.hpp"
#include "affine/transform.hpp"
#include "support.hpp"

using namespace affine;
using namespace support;

namespace {

AffineModel cir_with_jumps() {
  return scalar(1.0, 0.0, 0.0, 2.0, 1,
                {JumpMeasure::finite_atomic(1, {{1.0, v1(0.5)}}), JumpMeasure::finite_atomic(1, {{0.5, v1(1.0)}})});
}

Complex finite_value(const TransformValue& v) {
  REQUIRE(std::holds_alternative<FiniteValue>(v));
  return std::get<FiniteValue>(v).value;
}

}  // namespace

TEST_CASE("transform examples") {
  const TransformValue one = transform(golden("orthant_2d"), CVec::Zero(2), (Vec(2) << 1.0, 2.0).finished(), 1.0);
  CHECK(std::abs(finite_value(one) - 1.0) == 0.0);
  CHECK(std::string(verdict_name(one)) == "finite");

  const Complex v = finite_value(transform(cir(), c1(0.5), v1(1.0), 1.0));
  CHECK(std::abs(v - 2.0 * std::numbers::e) < 1e-8);
  CHECK(std::abs(v.real() - 5.43656) < 1e-5);

  const TransformValue ex = transform(cir(), c1(2.0), v1(1.0), 1.0);
  REQUIRE(std::holds_alternative<Explosive>(ex));
  CHECK(std::abs(std::get<Explosive>(ex).t_inf - 0.5) < 1e-6);
  CHECK(std::string(verdict_name(ex)) == "explosive");
}

TEST_CASE("finite value equals exp(psi0 + psi x)") {
  const Vec x = (Vec(2) << 0.3, 1.4).finished();
  const TransformValue tv = transform(golden("orthant_2d"), (CVec(2) << Complex(-0.2, 1.0), Complex(0.1, -2.0)).finished(), x, 1.3);
  const auto& f = std::get<FiniteValue>(tv);
  CHECK(std::abs(f.value - std::exp(f.psi0 + f.psi.cwiseProduct(x.cast<Complex>()).sum())) < 1e-15 * std::abs(f.value) + 1e-300);
}

TEST_CASE("zero region for non-real u in U past the explosion time") {
  // c(x) = [[x1, x2], [x2, -x1]] on R^2: z = psi1 + i psi2 solves z' = z^2 / 2, so u = (0, -i) gives z(0) = 1
  // and t_inf = 2.
  const AffineModel m = indefinite_2d();
  CVec u(2);
  u << 0.0, Complex(0.0, -1.0);
  REQUIRE(in_U(m.state_space(), u));
  const Vec x = (Vec(2) << 0.4, -0.7).finished();
  CHECK(std::holds_alternative<FiniteValue>(transform(m, u, x, 1.5)));
  const TransformValue z = transform(m, u, x, 2.5);
  REQUIRE(std::holds_alternative<ZeroRegion>(z));
  CHECK(std::abs(std::get<ZeroRegion>(z).t_inf - 2.0) < 1e-6);
  CHECK(std::string(verdict_name(z)) == "zero_region");
  for (double t : {2.6, 3.0, 5.0, 9.0}) CHECK(std::holds_alternative<ZeroRegion>(transform(m, u, x, t)));
}

TEST_CASE("unknown for non-real u outside U that explodes") {
  CVec u(2);
  u << 1.0, Complex(0.0, -1.0);
  REQUIRE_FALSE(in_U(indefinite_2d().state_space(), u));
  const TransformValue v = transform(indefinite_2d(), u, Vec::Zero(2), 1.5);
  CHECK(std::holds_alternative<Unknown>(v));
  CHECK(std::string(verdict_name(v)) == "unknown");
}

TEST_CASE("unknown for a divergent jump integral") {
  const AffineModel ray = scalar(0.0, 0.0, 0.0, 0.0, 1,
                                 {JumpMeasure::exponential_ray(1, 1.0, 3.0, v1(1.0)), JumpMeasure(1)});
  CHECK(std::holds_alternative<Unknown>(transform(ray, c1(4.0), v1(1.0), 1.0)));
}

TEST_CASE("transform rejects x outside E") {
  try {
    transform(cir(), c1(0.1), v1(-1.0), 1.0);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::StateSpaceMismatch);
  }
}

TEST_CASE("effective_domain_ray examples") {
  const RayProbe up = effective_domain_ray(cir(), v1(1.0), 1.0, 1e3);
  CHECK(std::abs(up.lambda_star - 1.0) < 1e-6);
  CHECK(up.bracket_width <= 1e-6 * up.lambda_star);
  for (const auto& pt : up.probes) {
    if (pt.lambda < up.lambda_star - up.bracket_width) CHECK_FALSE(pt.exploded);
    if (pt.lambda > up.lambda_star + up.bracket_width) CHECK(pt.exploded);
  }

  const RayProbe down = effective_domain_ray(cir(), v1(-1.0), 1.0, 1e3);
  CHECK(std::isinf(down.lambda_star));

  const RayProbe tiny = effective_domain_ray(cir(), v1(1.0), 1e-6, 1e3);
  CHECK(tiny.lambda_star >= 1e3);

  const RayProbe two = effective_domain_ray(golden("orthant_2d"), (Vec(2) << 0.6, 0.8).finished(), 1.0, 1e3);
  CHECK(std::isfinite(two.lambda_star));
  CHECK_THROWS_AS(effective_domain_ray(cir(), v1(0.0), 1.0, 1e3), Error);
}

TEST_CASE("damped_model examples") {
  const AffineModel m = scalar(0.0, 0.0, 0.0, 0.0, 1, {JumpMeasure::finite_atomic(1, {{1.0, v1(1.0)}}), JumpMeasure(1)});
  const AffineModel d1 = damped_model(m, 1);
  const auto& atoms = std::get<FiniteAtomic>(d1.K()[0].family()).atoms;
  REQUIRE(atoms.size() == 1);
  CHECK(std::abs(atoms[0].weight - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(atoms[0].weight - 0.367879) < 1e-6);
  CHECK(std::abs(d1.a0()(0) - (std::exp(-1.0) - 1.0)) < 1e-15);
  CHECK(std::abs(d1.a0()(0) + 0.632121) < 1e-6);

  const AffineModel big = damped_model(m, 1000000);
  CHECK(std::abs(std::get<FiniteAtomic>(big.K()[0].family()).atoms[0].weight - 1.0) < 1e-6);
  CHECK(std::abs(big.a0()(0)) < 1e-6);

  for (int n : {1, 10, 1000}) CHECK(damped_model(cir(), n) == cir());

  const AffineModel ray = scalar(0.0, 0.0, 0.0, 0.0, 1, {JumpMeasure::exponential_ray(1, 1.0, 3.0, v1(1.0)), JumpMeasure(1)});
  try {
    damped_model(ray, 2);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::UnsupportedFamily);
  }
}

TEST_CASE("damped_transform_sequence examples") {
  const DampedSequence flat = damped_transform_sequence(cir(), c1(Complex(-1.0, 2.0)), v1(1.0), 1.0, {10, 100, 1000});
  for (double c : flat.cauchy) CHECK(c < 1e-15);

  const DampedSequence ones = damped_transform_sequence(cir_with_jumps(), c1(0.0), v1(1.0), 1.0, {10, 100, 1000});
  for (Complex v : ones.values) CHECK(std::abs(v - 1.0) < 1e-15);

  const DampedSequence seq =
      damped_transform_sequence(cir_with_jumps(), c1(Complex(-1.0, 2.0)), v1(1.0), 1.0, {10, 100, 1000});
  REQUIRE(seq.undamped.has_value());
  REQUIRE(seq.distance_to_undamped.size() == 3);
  CHECK(seq.distance_to_undamped[1] < seq.distance_to_undamped[0]);
  CHECK(seq.distance_to_undamped[2] < seq.distance_to_undamped[1]);
  CHECK(seq.distance_to_undamped[2] < 1e-3);
  CHECK(seq.cauchy[1] < seq.cauchy[0]);
}

TEST_CASE("scaled_model examples") {
  CHECK(scaled_model(cir_with_jumps(), 1) == cir_with_jumps());

  const AffineModel wish = golden("wishart_2d");
  const AffineModel w2 = scaled_model(wish, 2);
  for (std::size_t i = 0; i < wish.A().size(); ++i) CHECK((w2.A()[i] - 2.0 * wish.A()[i]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w2.a() == wish.a());
  CHECK(w2.a0() == wish.a0());

  const AffineModel m = scalar(0.0, 0.0, 0.0, 0.0, 1, {JumpMeasure::finite_atomic(1, {{3.0, v1(0.5)}}), JumpMeasure(1)});
  const AffineModel m2 = scaled_model(m, 2);
  const auto& atoms = std::get<FiniteAtomic>(m2.K()[0].family()).atoms;
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].weight == 1.5);
  CHECK(atoms[0].z(0) == 1.0);
}

TEST_CASE("infinite_divisibility_check examples") {
  CHECK(infinite_divisibility_check(cir_with_jumps(), c1(0.3), 0.5, 1) < 1e-12);
  for (Complex u : {Complex(0.4), Complex(-1.0, 0.7), Complex(0.0, 2.0)})
    CHECK(infinite_divisibility_check(golden("ou"), c1(u), 1.0, 3) < 1e-9);
  CHECK(infinite_divisibility_check(cir(), c1(0.3), 0.5, 2) < 1e-8);
  CHECK(infinite_divisibility_check(golden("compound_poisson"), c1(Complex(0.2, 1.0)), 1.0, 5) < 1e-8);
  CHECK(infinite_divisibility_check(golden("wishart_2d"), (CVec(3) << -0.3, 0.1, Complex(-0.2, 1.0)).finished(), 1.0, 4) < 1e-8);
}

TEST_CASE("characteristic function is bounded by one") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const std::string name : {"cir", "ou", "compound_poisson", "orthant_2d", "wishart_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    for (int k = 0; k < 30; ++k) {
      CVec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = Complex(0.0, 3.0 * normal(rng));
      const Vec x = m.state_space().sample_interior(rng);
      const TransformValue tv = transform(m, u, x, 0.1 + 2.0 * unif(rng));
      REQUIRE(std::holds_alternative<FiniteValue>(tv));
      CHECK(std::abs(std::get<FiniteValue>(tv).value) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("conjugate symmetry and tower consistency") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const std::string name : {"cir", "compound_poisson", "orthant_2d", "lorentz"}) {
    const AffineModel m = golden(name);
    for (int k = 0; k < 10; ++k) {
      CVec u(m.dim());
      for (int i = 0; i < m.dim(); ++i) u(i) = Complex(-0.5 * std::abs(unif(rng)), 2.0 * unif(rng));
      const Vec x = m.state_space().sample_interior(rng);
      const double s = 0.1 + std::abs(unif(rng)), t = 0.1 + std::abs(unif(rng));
      const Complex a = finite_value(transform(m, u, x, t));
      const Complex b = finite_value(transform(m, u.conjugate(), x, t));
      CHECK(std::abs(a - std::conj(b)) < 1e-9 * std::max(1.0, std::abs(a)));

      const RiccatiSolution sol = solve_riccati(m, u, s);
      const Complex whole = finite_value(transform(m, u, x, s + t));
      const Complex split = std::exp(sol.terminal_psi0()) * finite_value(transform(m, sol.terminal_psi(), x, t));
      CHECK(std::abs(whole - split) < 1e-8 * std::max(1.0, std::abs(whole)));
    }
  }
}

TEST_CASE("finite real transforms stay finite at earlier times") {
  for (double u : {0.5, 1.0, 2.0}) {
    const double t = 0.9 / u;
    REQUIRE(std::holds_alternative<FiniteValue>(transform(cir(), c1(u), v1(1.0), t)));
    for (double s : {0.1 * t, 0.5 * t, 0.95 * t}) CHECK(std::holds_alternative<FiniteValue>(transform(cir(), c1(u), v1(1.0), s)));
    CHECK(std::holds_alternative<Explosive>(transform(cir(), c1(u), v1(1.0), 1.1 / u)));
  }
}
