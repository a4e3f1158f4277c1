#include "affine/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <cstring>
#include <string>
#include <type_traits>
#include <variant>

#include "affine/error.hpp"

namespace affine {

namespace {

void merge_component(std::vector<JumpComponent>& comps, JumpComponent::Shape shape, const Vec& z,
                     double rate, int index, double weight, int p) {
  for (auto& c : comps) {
    if (c.shape == shape && c.rate == rate && c.z == z) {
      c.intensity(index) += weight;
      return;
    }
  }
  JumpComponent c;
  c.shape = shape;
  c.z = z;
  c.rate = rate;
  c.intensity = Vec::Zero(p + 1);
  c.intensity(index) = weight;
  comps.push_back(std::move(c));
}

}  // namespace

AffineModel::AffineModel(StateSpace space, Vec a0, Mat a, std::vector<Mat> A,
                         std::vector<JumpMeasure> K)
    : space_(std::move(space)), a0_(std::move(a0)), a_(std::move(a)), A_(std::move(A)),
      K_(std::move(K)) {
  const int p = space_.dim();
  const auto up = static_cast<std::size_t>(p);
  require_dim(static_cast<std::size_t>(a0_.size()), up, "a0");
  if (a_.rows() != p || a_.cols() != p)
    throw Error(Error::Kind::DimensionMismatch, "a: expected a " + std::to_string(p) + "x" +
                                                    std::to_string(p) + " matrix");
  require_dim(A_.size(), up + 1, "A (number of diffusion matrices)");
  for (std::size_t i = 0; i < A_.size(); ++i) {
    Mat& m = A_[i];
    if (m.rows() != p || m.cols() != p)
      throw Error(Error::Kind::DimensionMismatch, "A[" + std::to_string(i) + "] has wrong shape");
    if (!m.allFinite())
      throw Error(Error::Kind::ModelFormat, "A[" + std::to_string(i) + "] is not finite");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw Error(Error::Kind::ModelFormat, "A[" + std::to_string(i) + "] is not symmetric");
    m = 0.5 * (m + m.transpose());
  }
  if (!a0_.allFinite() || !a_.allFinite())
    throw Error(Error::Kind::ModelFormat, "drift parameters are not finite");
  if (K_.empty()) K_.assign(up + 1, JumpMeasure(p));
  require_dim(K_.size(), up + 1, "K (number of jump measures)");
  for (std::size_t i = 0; i < K_.size(); ++i) {
    if (K_[i].dim() != p)
      throw Error(Error::Kind::DimensionMismatch, "K[" + std::to_string(i) + "] has wrong dimension");
  }

  for (int i = 0; i <= p; ++i) {
    std::visit(
        [&](const auto& fam) {
          using F = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<F, ExponentialRay>) {
            if (fam.mass != 0.0)
              merge_component(components_, JumpComponent::Shape::Ray, fam.direction, fam.rate, i,
                              fam.mass, p);
          } else {
            const auto& atoms = [&]() -> const std::vector<Atom>& {
              if constexpr (std::is_same_v<F, FiniteAtomic>) return fam.atoms;
              else return fam.nodes;
            }();
            for (const auto& at : atoms)
              merge_component(components_, JumpComponent::Shape::Atom, at.z, 0.0, i, at.weight, p);
          }
        },
        K_[static_cast<std::size_t>(i)].family());
  }
}

bool operator==(const AffineModel& x, const AffineModel& y) {
  return x.space_ == y.space_ && x.a0_ == y.a0_ && x.a_ == y.a_ && x.A_ == y.A_ && x.K_ == y.K_;
}

Vec drift_at(const AffineModel& model, const Vec& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(model.dim()), "x");
  return model.a0() + model.a() * x;
}

Mat diffusion_at(const AffineModel& model, const Vec& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(model.dim()), "x");
  Mat c = model.A()[0];
  for (int i = 0; i < model.dim(); ++i) c += x(i) * model.A()[static_cast<std::size_t>(i) + 1];
  return c;
}

double jump_intensity_at(const AffineModel& model, const Vec& x) {
  double total = 0.0;
  for (const auto& c : model.jump_components()) total += std::max(0.0, c.intensity_at(x));
  return total;
}

AdmissibilityReport check_admissibility(const AffineModel& model, int n_samples, std::uint64_t seed,
                                        double tol) {
  AdmissibilityReport rep;
  rep.tol = tol;
  const StateSpace& space = model.state_space();
  std::mt19937_64 rng(seed);
  const int samples = std::max(1, n_samples);
  for (int k = 0; k < samples; ++k)
    rep.sampled_points.push_back(k % 2 == 0 ? space.sample_interior(rng) : space.sample_boundary(rng));

  for (const Vec& x : rep.sampled_points) {
    Eigen::SelfAdjointEigenSolver<Mat> es(diffusion_at(model, x), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < rep.min_eigen_c) {
      rep.min_eigen_c = lo;
      rep.min_eigen_point = x;
    }
    for (const auto& comp : model.jump_components()) {
      const double w = comp.intensity_at(x);
      rep.min_jump_weight = std::min(rep.min_jump_weight, w);
      if (w <= tol) continue;
      bool ok = true;
      if (comp.shape == JumpComponent::Shape::Atom) {
        ok = space.contains(x + comp.z);
      } else {
        for (double s : {1e-2, 1.0, 1e2}) ok = ok && space.contains(x + s * comp.z);
      }
      if (!ok) {
        const bool seen = std::any_of(rep.support_violations.begin(), rep.support_violations.end(),
                                      [&](const Vec& z) { return z == comp.z; });
        if (!seen) rep.support_violations.push_back(comp.z);
      }
    }
  }
  rep.pass = rep.min_eigen_c >= -tol && rep.min_jump_weight >= -tol && rep.support_violations.empty();
  return rep;
}

bool in_U(const StateSpace& space, const CVec& u) { return space.bounded_above(u); }

std::vector<bool> exponential_moment_condition(const AffineModel& model) {
  std::vector<bool> out;
  out.reserve(model.K().size());
  for (const auto& k : model.K()) out.push_back(k.has_all_exponential_moments());
  return out;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ull;
    }
  }
  void num(double v) { bytes(&v, sizeof v); }
  void num(std::int64_t v) { bytes(&v, sizeof v); }
  void vec(const Vec& v) {
    num(static_cast<std::int64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) num(v(i));
  }
  void mat(const Mat& m) {
    num(static_cast<std::int64_t>(m.rows()));
    num(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) num(m(i, j));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace

std::uint64_t model_hash(const AffineModel& model) {
  Fnv1a h;
  const StateSpace& space = model.state_space();
  h.num(static_cast<std::int64_t>(space.dim()));
  h.num(static_cast<std::int64_t>(space.kind().index()));
  std::visit(
      [&](const auto& k) {
        using S = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<S, Canonical>) h.num(static_cast<std::int64_t>(k.m));
        if constexpr (std::is_same_v<S, PSDCone>) h.num(static_cast<std::int64_t>(k.d));
        if constexpr (std::is_same_v<S, HalfSpaces>) {
          for (const auto& c : k.constraints) {
            h.vec(c.normal);
            h.num(c.offset);
          }
        }
      },
      space.kind());
  h.vec(model.a0());
  h.mat(model.a());
  for (const Mat& m : model.A()) h.mat(m);
  for (const JumpMeasure& k : model.K()) {
    h.num(static_cast<std::int64_t>(k.family().index()));
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, ExponentialRay>) {
            h.num(f.mass);
            h.num(f.rate);
            h.vec(f.direction);
          } else {
            const auto& atoms = [&]() -> const std::vector<Atom>& {
              if constexpr (std::is_same_v<F, FiniteAtomic>) return f.atoms;
              else return f.nodes;
            }();
            h.num(static_cast<std::int64_t>(atoms.size()));
            for (const auto& a : atoms) {
              h.num(a.weight);
              h.vec(a.z);
            }
          }
        },
        k.family());
  }
  return h.value();
}

}  // namespace affine
