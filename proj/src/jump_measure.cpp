#include "affine/jump_measure.hpp"

#include <cmath>
#include <string>

#include "affine/error.hpp"

namespace affine {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_atoms(int dim, const std::vector<Atom>& atoms, const char* what) {
  for (const auto& a : atoms) {
    if (a.z.size() != dim)
      throw Error(Error::Kind::DimensionMismatch,
                  std::string(what) + ": atom of length " + std::to_string(a.z.size()) +
                      " in a " + std::to_string(dim) + "-dimensional model");
    if (a.z.norm() == 0.0)
      throw Error(Error::Kind::ModelFormat, std::string(what) + ": atoms must be nonzero");
    if (!std::isfinite(a.weight) || !a.z.allFinite())
      throw Error(Error::Kind::ModelFormat, std::string(what) + ": non-finite atom");
  }
}

Complex dot(const CVec& y, const Vec& z) {
  Complex s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += y(i) * z(i);
  return s;
}

Complex atoms_integral(const std::vector<Atom>& atoms, const CVec& y) {
  Complex s = 0.0;
  for (const auto& a : atoms) s += a.weight * exp_remainder(dot(y, a.z));
  return s;
}

double atoms_truncated_moment(const std::vector<Atom>& atoms) {
  double s = 0.0;
  for (const auto& a : atoms) {
    const double r = a.z.norm();
    s += std::abs(a.weight) * std::min(r * r, r);
  }
  return s;
}

}  // namespace

Complex exp_remainder(Complex q) {
  if (std::abs(q) < 0.5) {
    // sum_{k>=2} q^k / k!
    Complex term = 0.5 * q * q;
    Complex sum = term;
    for (int k = 3; k < 40; ++k) {
      term *= q / static_cast<double>(k);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(q) - 1.0 - q;
}

JumpMeasure JumpMeasure::finite_atomic(int dim, std::vector<Atom> atoms) {
  check_atoms(dim, atoms, "finite_atomic");
  return JumpMeasure(dim, FiniteAtomic{std::move(atoms)});
}

JumpMeasure JumpMeasure::exponential_ray(int dim, double mass, double rate, Vec direction) {
  if (direction.size() != dim)
    throw Error(Error::Kind::DimensionMismatch, "exponential_ray: direction has wrong length");
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw Error(Error::Kind::ModelFormat, "exponential_ray: rate must be positive");
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw Error(Error::Kind::ModelFormat, "exponential_ray: direction must be a unit vector");
  if (!std::isfinite(mass)) throw Error(Error::Kind::ModelFormat, "exponential_ray: bad mass");
  return JumpMeasure(dim, ExponentialRay{mass, rate, std::move(direction)});
}

JumpMeasure JumpMeasure::tabulated(int dim, std::vector<Atom> nodes) {
  check_atoms(dim, nodes, "tabulated");
  return JumpMeasure(dim, TabulatedDensity{std::move(nodes)});
}

JumpMeasure JumpMeasure::tabulated_ray(const Vec& direction, const std::vector<double>& grid,
                                       const std::vector<double>& density) {
  if (grid.size() != density.size() || grid.size() < 2)
    throw Error(Error::Kind::ModelFormat, "tabulated_ray: grid and density must match, >= 2 nodes");
  std::vector<Atom> nodes;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j > 0 && !(grid[j] > grid[j - 1]))
      throw Error(Error::Kind::ModelFormat, "tabulated_ray: grid must be increasing");
    const double left = j > 0 ? grid[j] - grid[j - 1] : 0.0;
    const double right = j + 1 < grid.size() ? grid[j + 1] - grid[j] : 0.0;
    const double w = 0.5 * (left + right) * density[j];
    if (grid[j] == 0.0) continue;  // z = 0 carries no compensated mass
    nodes.push_back(Atom{w, grid[j] * direction});
  }
  return tabulated(static_cast<int>(direction.size()), std::move(nodes));
}

bool JumpMeasure::empty() const {
  return std::visit(overloaded{
                        [](const FiniteAtomic& f) { return f.atoms.empty(); },
                        [](const ExponentialRay& r) { return r.mass == 0.0; },
                        [](const TabulatedDensity& t) { return t.nodes.empty(); },
                    },
                    family_);
}

Complex JumpMeasure::exp_moment(const CVec& y) const {
  require_dim(static_cast<std::size_t>(y.size()), static_cast<std::size_t>(dim_), "exp_moment y");
  return std::visit(
      overloaded{
          [&](const FiniteAtomic& f) { return atoms_integral(f.atoms, y); },
          [&](const ExponentialRay& r) {
            if (r.mass == 0.0) return Complex(0.0);
            const Complex q = dot(y, r.direction);
            if (!(q.real() < r.rate))
              throw Error(Error::Kind::DivergentIntegral,
                          "exponential ray: Re(y.d) = " + std::to_string(q.real()) +
                              " >= rate " + std::to_string(r.rate));
            return r.mass * q * q / (r.rate * (r.rate - q));
          },
          [&](const TabulatedDensity& t) { return atoms_integral(t.nodes, y); },
      },
      family_);
}

double JumpMeasure::truncated_moment() const {
  return std::visit(
      overloaded{
          [](const FiniteAtomic& f) { return atoms_truncated_moment(f.atoms); },
          [](const ExponentialRay& r) {
            const double rho = r.rate;
            const double e = std::exp(-rho);
            const double inner = 2.0 / (rho * rho) * (1.0 - e * (1.0 + rho + 0.5 * rho * rho));
            const double outer = e * (1.0 + 1.0 / rho);
            return std::abs(r.mass) * (inner + outer);
          },
          [](const TabulatedDensity& t) { return atoms_truncated_moment(t.nodes); },
      },
      family_);
}

bool JumpMeasure::has_all_exponential_moments() const {
  return std::visit(overloaded{
                        [](const FiniteAtomic&) { return true; },
                        [](const ExponentialRay& r) { return r.mass == 0.0; },
                        [](const TabulatedDensity&) { return true; },
                    },
                    family_);
}

bool JumpMeasure::grid_tail_flag(const CVec& y) const {
  const auto* t = std::get_if<TabulatedDensity>(&family_);
  if (t == nullptr || t->nodes.empty()) return false;
  const Complex total = atoms_integral(t->nodes, y);
  const Atom& last = t->nodes.back();
  const double tail = std::abs(last.weight * exp_remainder(dot(y, last.z)));
  return tail > 1e-8 * std::abs(total);
}

bool operator==(const JumpMeasure& a, const JumpMeasure& b) {
  if (a.dim_ != b.dim_ || a.family_.index() != b.family_.index()) return false;
  auto same_atoms = [](const std::vector<Atom>& x, const std::vector<Atom>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].weight != y[i].weight || x[i].z != y[i].z) return false;
    return true;
  };
  return std::visit(overloaded{
                        [&](const FiniteAtomic& f) {
                          return same_atoms(f.atoms, std::get<FiniteAtomic>(b.family_).atoms);
                        },
                        [&](const ExponentialRay& r) {
                          const auto& o = std::get<ExponentialRay>(b.family_);
                          return r.mass == o.mass && r.rate == o.rate && r.direction == o.direction;
                        },
                        [&](const TabulatedDensity& t) {
                          return same_atoms(t.nodes, std::get<TabulatedDensity>(b.family_).nodes);
                        },
                    },
                    a.family_);
}

Complex exp_moment_integral(const JumpMeasure& measure, const CVec& y) {
  return measure.exp_moment(y);
}

}  // namespace affine
