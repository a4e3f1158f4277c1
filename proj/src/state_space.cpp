#include "affine/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affine/error.hpp"

namespace affine {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double scale_of(const Vec& x) { return std::max(1.0, x.norm()); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Dykstra's alternating projections onto an intersection of half-spaces.
Vec dykstra(const std::vector<HalfSpace>& hs, const Vec& x0, double shrink) {
  const std::size_t k = hs.size();
  std::vector<Vec> incr(k, Vec::Zero(x0.size()));
  Vec x = x0;
  for (int cycle = 0; cycle < 20000; ++cycle) {
    Vec start = x;
    for (std::size_t i = 0; i < k; ++i) {
      const Vec& n = hs[i].normal;
      const double c = hs[i].offset - shrink * n.norm();
      Vec y = x + incr[i];
      const double viol = n.dot(y) - c;
      Vec px = viol > 0.0 ? Vec(y - (viol / n.squaredNorm()) * n) : y;
      incr[i] = y - px;
      x = std::move(px);
    }
    if ((x - start).norm() <= 1e-15 * scale_of(x)) break;
  }
  return x;
}

}  // namespace

Vec vech(const Mat& sym) {
  const int d = static_cast<int>(sym.rows());
  Vec v(d * (d + 1) / 2);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) v(k++) = sym(i, j);
  return v;
}

Mat unvech(const Vec& v, int d) {
  require_dim(static_cast<std::size_t>(v.size()), static_cast<std::size_t>(d * (d + 1) / 2),
              "unvech");
  Mat m(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  return m;
}

Vec svec(const Mat& sym) {
  Vec v = vech(sym);
  const int d = static_cast<int>(sym.rows());
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k)
      if (i != j) v(k) *= kSqrt2;
  return v;
}

Mat unsvec(const Vec& v, int d) {
  Mat m = unvech(v, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) m(i, j) /= kSqrt2;
  return m;
}

int psd_side(int p) {
  for (int d = 1; d * (d + 1) / 2 <= p; ++d)
    if (d * (d + 1) / 2 == p) return d;
  return -1;
}

Vec project_lorentz(const Vec& x) {
  const double t = x(0);
  const double n = x.tail(x.size() - 1).norm();
  if (n <= t) return x;
  if (n <= -t) return Vec::Zero(x.size());
  const double alpha = 0.5 * (t + n);
  Vec out(x.size());
  out(0) = alpha;
  out.tail(x.size() - 1) = (alpha / n) * x.tail(x.size() - 1);
  return out;
}

Vec nnls(const Mat& m, const Vec& b) {
  const int n = static_cast<int>(m.cols());
  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  const double eps = 1e-12 * std::max(1.0, m.norm() * b.norm());
  for (int outer = 0; outer < 3 * n + 3; ++outer) {
    Vec w = m.transpose() * (b - m * x);
    int best = -1;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w(j) > eps && (best < 0 || w(j) > w(best))) best = j;
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < 3 * n + 3; ++inner) {
      std::vector<int> idx;
      for (int j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      Mat sub(m.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = m.col(idx[c]);
      Vec zs = sub.colPivHouseholderQr().solve(b);
      Vec z = Vec::Zero(n);
      for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(c);
      bool feasible = true;
      double alpha = 1.0;
      for (int j : idx) {
        if (z(j) <= 0.0) {
          feasible = false;
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (int j : idx)
        if (x(j) <= 1e-14) {
          x(j) = 0.0;
          passive[j] = false;
        }
    }
  }
  return x;
}

StateSpace StateSpace::canonical(int m, int p) {
  if (p < 1 || m < 0 || m > p)
    throw Error(Error::Kind::ModelFormat, "canonical state space needs 0 <= m <= p, p >= 1");
  return StateSpace(p, Canonical{m});
}

StateSpace StateSpace::psd(int d) {
  if (d < 1) throw Error(Error::Kind::ModelFormat, "psd state space needs d >= 1");
  return StateSpace(d * (d + 1) / 2, PSDCone{d});
}

StateSpace StateSpace::lorentz(int p) {
  if (p < 1) throw Error(Error::Kind::ModelFormat, "lorentz state space needs p >= 1");
  return StateSpace(p, Lorentz{});
}

StateSpace StateSpace::parabolic(int p) {
  if (p < 1) throw Error(Error::Kind::ModelFormat, "parabolic state space needs p >= 1");
  return StateSpace(p, Parabolic{});
}

StateSpace StateSpace::half_spaces(int p, std::vector<HalfSpace> constraints) {
  if (p < 1) throw Error(Error::Kind::ModelFormat, "half-space state space needs p >= 1");
  for (const auto& h : constraints) {
    require_dim(static_cast<std::size_t>(h.normal.size()), static_cast<std::size_t>(p),
                "half-space normal");
    if (h.normal.norm() == 0.0)
      throw Error(Error::Kind::ModelFormat, "half-space normal must be nonzero");
  }
  double scale = 1.0;
  for (const auto& h : constraints) scale = std::max(scale, std::abs(h.offset));
  Vec anchor = dykstra(constraints, Vec::Zero(p), 1e-6 * scale);
  for (const auto& h : constraints) {
    if (!(h.normal.dot(anchor) < h.offset))
      throw Error(Error::Kind::ModelFormat,
                  "half-space state space has empty interior (lower-dimensional sets are rejected)");
  }
  StateSpace s(p, HalfSpaces{std::move(constraints)});
  s.anchor_ = anchor;
  return s;
}

std::string StateSpace::name() const {
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            return "Canonical(" + std::to_string(c.m) + "," + std::to_string(dim_) + ")";
          },
          [&](const PSDCone& c) { return "PSDCone(" + std::to_string(c.d) + ")"; },
          [&](const Lorentz&) { return "Lorentz(" + std::to_string(dim_) + ")"; },
          [&](const Parabolic&) { return "Parabolic(" + std::to_string(dim_) + ")"; },
          [&](const HalfSpaces& h) {
            return "HalfSpaceIntersection(" + std::to_string(h.constraints.size()) + ")";
          },
      },
      kind_);
}

bool StateSpace::contains(const Vec& x, double tol) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim_), "state");
  if (!x.allFinite()) return false;
  const double slack = tol * scale_of(x);
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            for (int i = 0; i < c.m; ++i)
              if (x(i) < -slack) return false;
            return true;
          },
          [&](const PSDCone& c) {
            Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(x, c.d), Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff() >= -slack;
          },
          [&](const Lorentz&) { return x(0) - x.tail(dim_ - 1).norm() >= -slack; },
          [&](const Parabolic&) {
            return x(0) - x.tail(dim_ - 1).squaredNorm() >= -slack;
          },
          [&](const HalfSpaces& h) {
            for (const auto& c : h.constraints)
              if (c.normal.dot(x) - c.offset > slack * c.normal.norm()) return false;
            return true;
          },
      },
      kind_);
}

bool StateSpace::interior(const Vec& x) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim_), "state");
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            for (int i = 0; i < c.m; ++i)
              if (!(x(i) > 0.0)) return false;
            return true;
          },
          [&](const PSDCone& c) {
            Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(x, c.d), Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff() > 0.0;
          },
          [&](const Lorentz&) { return x(0) > x.tail(dim_ - 1).norm(); },
          [&](const Parabolic&) { return x(0) > x.tail(dim_ - 1).squaredNorm(); },
          [&](const HalfSpaces& h) {
            for (const auto& c : h.constraints)
              if (!(c.normal.dot(x) < c.offset)) return false;
            return true;
          },
      },
      kind_);
}

Vec StateSpace::project(const Vec& x) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim_), "state");
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            Vec out = x;
            for (int i = 0; i < c.m; ++i) out(i) = std::max(out(i), 0.0);
            return out;
          },
          [&](const PSDCone& c) {
            Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(x, c.d));
            if (es.eigenvalues().minCoeff() >= 0.0) return Vec(x);
            Vec ev = es.eigenvalues().cwiseMax(0.0);
            Mat m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            return svec(0.5 * (m + m.transpose()));
          },
          [&](const Lorentz&) { return project_lorentz(x); },
          [&](const Parabolic&) {
            const Vec y = x.tail(dim_ - 1);
            const double ny2 = y.squaredNorm();
            if (x(0) >= ny2) return Vec(x);
            // KKT: z_1 = x_1 + lam, w = y / (1 + 2 lam), z_1 = |w|^2.
            auto f = [&](double lam) { return x(0) + lam - ny2 / ((1 + 2 * lam) * (1 + 2 * lam)); };
            double lo = 0.0, hi = ny2 + std::abs(x(0)) + 1.0;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
              const double mid = 0.5 * (lo + hi);
              (f(mid) < 0.0 ? lo : hi) = mid;
            }
            const double lam = hi;
            Vec out(dim_);
            out.tail(dim_ - 1) = y / (1 + 2 * lam);
            out(0) = std::max(x(0) + lam, out.tail(dim_ - 1).squaredNorm());
            return out;
          },
          [&](const HalfSpaces& h) {
            if (contains(x, 0.0)) return Vec(x);
            return dykstra(h.constraints, x, 0.0);
          },
      },
      kind_);
}

bool StateSpace::bounded_above(const CVec& u) const {
  require_dim(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(dim_), "u");
  const Vec re = u.real();
  constexpr double kZero = 1e-14;
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            for (int i = 0; i < dim_; ++i) {
              if (i < c.m && re(i) > kZero) return false;
              if (i >= c.m && std::abs(re(i)) > kZero) return false;
            }
            return true;
          },
          [&](const PSDCone& c) {
            Eigen::SelfAdjointEigenSolver<Mat> es(unsvec(-re, c.d), Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff() >= -kZero * scale_of(re);
          },
          [&](const Lorentz&) {
            return -re(0) - re.tail(dim_ - 1).norm() >= -kZero * scale_of(re);
          },
          [&](const Parabolic&) {
            if (re(0) < -kZero) return true;
            return std::abs(re(0)) <= kZero && re.tail(dim_ - 1).norm() <= kZero;
          },
          [&](const HalfSpaces& h) {
            // Bounded iff Re u lies in the cone generated by the normals (Farkas).
            if (re.norm() <= kZero) return true;
            if (h.constraints.empty()) return false;
            Mat n(dim_, static_cast<Eigen::Index>(h.constraints.size()));
            for (std::size_t k = 0; k < h.constraints.size(); ++k) n.col(k) = h.constraints[k].normal;
            const Vec lam = nnls(n, re);
            return (n * lam - re).norm() <= 1e-9 * scale_of(re);
          },
      },
      kind_);
}

Vec StateSpace::sample_interior(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> expo(0.5);
  return std::visit(
      overloaded{
          [&](const Canonical& c) {
            Vec x(dim_);
            for (int i = 0; i < dim_; ++i) x(i) = i < c.m ? expo(rng) + 1e-3 : 2.0 * normal(rng);
            return x;
          },
          [&](const PSDCone& c) {
            Mat g(c.d, c.d);
            for (int i = 0; i < c.d; ++i)
              for (int j = 0; j < c.d; ++j) g(i, j) = normal(rng);
            Mat m = g * g.transpose() / c.d + 0.05 * Mat::Identity(c.d, c.d);
            return svec(m);
          },
          [&](const Lorentz&) {
            Vec x(dim_);
            for (int i = 1; i < dim_; ++i) x(i) = normal(rng);
            x(0) = x.tail(dim_ - 1).norm() + expo(rng) + 1e-3;
            return x;
          },
          [&](const Parabolic&) {
            Vec x(dim_);
            for (int i = 1; i < dim_; ++i) x(i) = normal(rng);
            x(0) = x.tail(dim_ - 1).squaredNorm() + expo(rng) + 1e-3;
            return x;
          },
          [&](const HalfSpaces&) {
            Vec g(dim_);
            for (int i = 0; i < dim_; ++i) g(i) = normal(rng);
            double r = 2.0;
            for (int it = 0; it < 60; ++it, r *= 0.5) {
              Vec x = anchor_ + r * g;
              if (interior(x)) return x;
            }
            return Vec(anchor_);
          },
      },
      kind_);
}

Vec StateSpace::sample_boundary(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  Vec x = sample_interior(rng);
  for (int i = 0; i < dim_; ++i) x(i) += 3.0 * normal(rng);
  return project(x);
}

bool operator==(const StateSpace& a, const StateSpace& b) {
  if (a.dim_ != b.dim_ || a.kind_.index() != b.kind_.index()) return false;
  return std::visit(
      overloaded{
          [&](const Canonical& c) { return c.m == std::get<Canonical>(b.kind_).m; },
          [&](const PSDCone& c) { return c.d == std::get<PSDCone>(b.kind_).d; },
          [&](const Lorentz&) { return true; },
          [&](const Parabolic&) { return true; },
          [&](const HalfSpaces& h) {
            const auto& o = std::get<HalfSpaces>(b.kind_).constraints;
            if (o.size() != h.constraints.size()) return false;
            for (std::size_t i = 0; i < o.size(); ++i)
              if (o[i].offset != h.constraints[i].offset || o[i].normal != h.constraints[i].normal)
                return false;
            return true;
          },
      },
      a.kind_);
}

}  // namespace affine
