#include "affine/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "affine/error.hpp"

namespace affine {

SelfDualCone SelfDualCone::orthant(int p) {
  if (p < 1) throw Error(Error::Kind::InvalidArgument, "orthant needs p >= 1");
  return SelfDualCone(Kind::Orthant, p, 0);
}

SelfDualCone SelfDualCone::vech_psd(int d) {
  if (d < 1) throw Error(Error::Kind::InvalidArgument, "psd cone needs d >= 1");
  return SelfDualCone(Kind::VechPSD, d * (d + 1) / 2, d);
}

SelfDualCone SelfDualCone::lorentz(int p) {
  if (p < 1) throw Error(Error::Kind::InvalidArgument, "lorentz cone needs p >= 1");
  return SelfDualCone(Kind::Lorentz, p, 0);
}

SelfDualCone SelfDualCone::from_state_space(const StateSpace& space) {
  if (const auto* c = std::get_if<Canonical>(&space.kind()); c && c->m == space.dim())
    return orthant(space.dim());
  if (const auto* c = std::get_if<PSDCone>(&space.kind())) return vech_psd(c->d);
  if (std::holds_alternative<Lorentz>(space.kind())) return lorentz(space.dim());
  throw Error(Error::Kind::UnsupportedSpace,
              "state space " + space.name() + " is not a supported self-dual cone");
}

double SelfDualCone::margin(const Vec& x) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim_), "cone point");
  switch (kind_) {
    case Kind::Orthant:
      return x.minCoeff();
    case Kind::VechPSD: {
      Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(x, side_), Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    }
    case Kind::Lorentz:
      return (x(0) - x.tail(dim_ - 1).norm()) / std::numbers::sqrt2;
  }
  return 0.0;
}

Vec SelfDualCone::project(const Vec& x) const {
  switch (kind_) {
    case Kind::Orthant:
      return x.cwiseMax(0.0);
    case Kind::VechPSD: {
      Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(x, side_));
      const Mat m = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    es.eigenvectors().transpose();
      return svec(0.5 * (m + m.transpose()));
    }
    case Kind::Lorentz:
      return project_lorentz(x);
  }
  return x;
}

double SelfDualCone::phi(const Vec& x) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim_), "cone point");
  switch (kind_) {
    case Kind::Orthant:
      return x.prod();
    case Kind::VechPSD:
      return unsvec(x, side_).determinant();
    case Kind::Lorentz:
      return x(0) * x(0) - x.tail(dim_ - 1).squaredNorm();
  }
  return 0.0;
}

int SelfDualCone::phi_degree() const {
  switch (kind_) {
    case Kind::Orthant:
      return dim_;
    case Kind::VechPSD:
      return side_;
    case Kind::Lorentz:
      return 2;
  }
  return 0;
}

bool cone_leq(const SelfDualCone& cone, const Vec& u, const Vec& v, double tol) {
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(v.size()), "cone_leq");
  return cone.contains(v - u, tol);
}

double boundary_phi(const SelfDualCone& cone, const Vec& x) { return cone.phi(x); }

OrderCheck monotonicity_check(const AffineModel& model, const Vec& u, const Vec& v, double t,
                              const SolverConfig& cfg, int n_grid) {
  const SelfDualCone cone = SelfDualCone::from_state_space(model.state_space());
  const double pre_tol = 1e-12 * std::max(1.0, std::max(u.norm(), v.norm()));
  if (!cone.contains(-u, pre_tol) || !cone.contains(-v, pre_tol))
    throw Error(Error::Kind::InvalidArgument, "monotonicity check needs u, v in -E");
  if (!cone_leq(cone, u, v, pre_tol))
    throw Error(Error::Kind::InvalidArgument, "monotonicity check needs u <= v");
  if (!(t > 0.0)) throw Error(Error::Kind::InvalidArgument, "monotonicity check needs t > 0");

  const RiccatiSolution su = solve_riccati(model, u.cast<Complex>(), t, cfg);
  const RiccatiSolution sv = solve_riccati(model, v.cast<Complex>(), t, cfg);
  if (!su.solved() || !sv.solved())
    throw Error(Error::Kind::ExplosionBeforeHorizon, "monotonicity check: explosion before t");

  OrderCheck res;
  res.tolerance = 100.0 * cfg.rel_tol;
  res.min_psi0_gap = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int k = 0; k <= n_grid; ++k) {
    const double s = t * k / n_grid;
    const auto [pu0, pu] = su.at(s);
    const auto [pv0, pv] = sv.at(s);
    const double gap = pv0.real() - pu0.real();
    const double slack = cone.distance(pv.real() - pu.real());
    res.min_psi0_gap = std::min(res.min_psi0_gap, gap);
    res.max_cone_slack = std::max(res.max_cone_slack, slack);
    const double scale = std::max({1.0, std::abs(pu0), std::abs(pv0)});
    const double pscale = std::max({1.0, pu.norm(), pv.norm()});
    ok = ok && gap >= -res.tolerance * scale && slack <= res.tolerance * pscale;
  }
  res.pass = ok;
  return res;
}

InteriorCheck interior_preservation_check(const AffineModel& model, const CVec& u, double t,
                                          const SolverConfig& cfg, int n_grid) {
  const SelfDualCone cone = SelfDualCone::from_state_space(model.state_space());
  if (!cone.interior(-u.real()))
    throw Error(Error::Kind::InvalidArgument, "interior preservation needs Re u in -int(E)");
  InteriorCheck res;
  const RiccatiSolution sol = solve_riccati(model, u, t, cfg);
  res.exploded = !sol.solved();
  res.min_margin = std::numeric_limits<double>::infinity();
  const double end = sol.last_time();
  for (int k = 0; k <= n_grid; ++k) {
    const double s = end * k / n_grid;
    res.min_margin = std::min(res.min_margin, cone.margin(-sol.at(s).second.real()));
  }
  for (const CVec& psi : sol.psi()) res.min_margin = std::min(res.min_margin, cone.margin(-psi.real()));
  res.pass = !res.exploded && res.min_margin > 0.0;
  return res;
}

bool regularity_Lu_check(const AffineModel& model, const Vec& u) {
  const SelfDualCone cone = SelfDualCone::from_state_space(model.state_space());
  const int p = model.dim();
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(p), "u");
  Vec mass = Vec::Zero(p);
  for (int i = 1; i <= p; ++i) {
    const JumpMeasure& k = model.K()[static_cast<std::size_t>(i)];
    const auto* f = std::get_if<FiniteAtomic>(&k.family());
    if (f == nullptr) {
      if (k.empty()) continue;
      throw Error(Error::Kind::UnsupportedFamily, "L_u regularity check needs finite atomic measures");
    }
    for (const Atom& a : f->atoms) {
      if (!model.state_space().contains(a.z))
        throw Error(Error::Kind::InvalidArgument, "L_u regularity check needs atoms in E");
      const double phase = u.dot(a.z);
      const double lattice = 2.0 * std::numbers::pi * std::round(phase / (2.0 * std::numbers::pi));
      if (std::abs(phase - lattice) > 1e-9) mass(i - 1) += a.weight;
    }
  }
  return cone.interior(mass);
}

}  // namespace affine
