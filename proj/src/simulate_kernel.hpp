#pragma once

// Per-path Euler kernel shared by the serial and OpenMP drivers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "affine/error.hpp"
#include "affine/model.hpp"
#include "affine/rng.hpp"
#include "affine/simulate.hpp"

namespace affine::detail {

inline constexpr double kClipTol = 1e-10;

/// Model parameters flattened into contiguous row-major arrays.
struct FlatModel {
  int p = 0;
  std::vector<double> a0;     // p
  std::vector<double> a;      // p x p, row i holds (a^1_i, ..., a^p_i)
  std::vector<double> A;      // (p+1) x p x p
  bool has_diffusion = false;
  // jump components
  int n_comp = 0;
  std::vector<double> intensity;  // n_comp x (p+1)
  std::vector<double> z;          // n_comp x p
  std::vector<double> mean_jump;  // n_comp x p, z for atoms and z / rate for rays
  std::vector<double> rate;       // 0 for atoms
};

struct StepContext {
  const AffineModel* model = nullptr;
  FlatModel flat;
  Vec x0;
  SimConfig cfg;
  int n_steps = 0;
  double dt = 0.0;
  std::vector<int> checkpoint_steps;
  enum class Space { General, Canonical, PSD, Lorentz };
  Space space = Space::General;
  int space_param = 0;  // m for Canonical, d for PSD
};

StepContext make_context(const AffineModel& model, const Vec& x0, const SimConfig& cfg);
PathEnsemble make_ensemble(const StepContext& ctx);

/// Scratch buffers reused across the paths handled by one thread.
struct Workspace {
  explicit Workspace(int p)
      : x(p), xn(p), drift(p), xi(p), c(static_cast<std::size_t>(p) * p),
        chol(static_cast<std::size_t>(p) * p) {}
  Vec x, xn, drift, xi;
  std::vector<double> c, chol;
  std::vector<double> intensities;
  double last_mu = -1.0;
  double last_exp = 1.0;
};

/// Factor F of c (row-major, p x p) with F F^T = c. Semi-definite matrices are handled by
/// clipping eigenvalues in [-kClipTol * scale, 0) to zero.
inline void factor_diffusion(int p, std::span<const double> c, std::span<double> l) {
  if (p == 1) {
    const double v = c[0];
    if (v < -kClipTol * std::max(1.0, std::abs(v)))
      throw Error(Error::Kind::CholeskyFailure, "diffusion matrix has negative eigenvalue " + std::to_string(v));
    l[0] = std::sqrt(std::max(v, 0.0));
    return;
  }
  std::fill(l.begin(), l.end(), 0.0);
  bool ok = true;
  for (int j = 0; j < p && ok; ++j) {
    double d = c[j * p + j];
    for (int k = 0; k < j; ++k) d -= l[j * p + k] * l[j * p + k];
    if (!(d > 1e-14)) {
      ok = false;
      break;
    }
    const double ljj = std::sqrt(d);
    l[j * p + j] = ljj;
    for (int i = j + 1; i < p; ++i) {
      double s = c[i * p + j];
      for (int k = 0; k < j; ++k) s -= l[i * p + k] * l[j * p + k];
      l[i * p + j] = s / ljj;
    }
  }
  if (ok) return;
  // Eigenvalue clipping; the factor V sqrt(D) is not triangular but satisfies F F^T = c.
  Mat cm(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) cm(i, j) = c[i * p + j];
  Eigen::SelfAdjointEigenSolver<Mat> es(cm);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -kClipTol * scale)
    throw Error(Error::Kind::CholeskyFailure,
                "diffusion matrix has negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  const Mat f = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) l[i * p + j] = f(i, j);
}

inline constexpr int kMaxFastSide = 8;

/// Sufficient test for svec(x) positive definite: a Cholesky factorization succeeds.
inline bool psd_cholesky_ok(const Vec& x, int d) {
  if (d > kMaxFastSide) return false;
  double a[kMaxFastSide][kMaxFastSide];
  for (int i = 0, k = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) a[j][i] = i == j ? x(k) : x(k) * std::numbers::sqrt2 / 2.0;
  for (int j = 0; j < d; ++j) {
    double piv = a[j][j];
    for (int k = 0; k < j; ++k) piv -= a[j][k] * a[j][k];
    if (!(piv > 0.0)) return false;
    const double l = std::sqrt(piv);
    a[j][j] = l;
    for (int i = j + 1; i < d; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / l;
    }
  }
  return true;
}

/// Simulates one path and writes its checkpoint states and bookkeeping into `out`.
inline void simulate_one_path(const StepContext& ctx, int path, Workspace& ws, PathEnsemble& out) {
  const FlatModel& fm = ctx.flat;
  const int p = fm.p;
  const auto up = static_cast<std::size_t>(p);
  const double dt = ctx.dt;
  const double sqdt = std::sqrt(dt);
  ws.intensities.resize(static_cast<std::size_t>(fm.n_comp));

  auto store = [&](int checkpoint, const Vec& x) {
    const auto offset = (static_cast<std::size_t>(checkpoint) * static_cast<std::size_t>(out.n_paths) +
                         static_cast<std::size_t>(path)) * up;
    for (int i = 0; i < p; ++i) out.states[offset + static_cast<std::size_t>(i)] = x(i);
  };

  Vec& x = ws.x;
  x = ctx.x0;
  double sup = x.squaredNorm();
  double integrated = 0.0;
  std::uint32_t jumps = 0;
  std::size_t next_ck = 1;
  store(0, x);

  for (int step = 0; step < ctx.n_steps; ++step) {
    CellStream rng(ctx.cfg.seed, static_cast<std::uint64_t>(path), static_cast<std::uint32_t>(step));

    // drift and diffusion at the left endpoint
    for (int i = 0; i < p; ++i) {
      double b = fm.a0[static_cast<std::size_t>(i)];
      const double* row = fm.a.data() + static_cast<std::size_t>(i) * up;
      for (int j = 0; j < p; ++j) b += row[j] * x(j);
      ws.drift(i) = b;
    }
    if (fm.has_diffusion) {
      if (p == 1) {
        const double v = fm.A[0] + fm.A[1] * x(0);
        ws.chol[0] = v > 0.0 ? std::sqrt(v) : 0.0;
        if (v < 0.0) factor_diffusion(1, std::span<const double>(&v, 1), ws.chol);
      } else {
        const std::size_t pp = up * up;
        for (std::size_t e = 0; e < pp; ++e) ws.c[e] = fm.A[e];
        for (int k = 0; k < p; ++k) {
          const double xk = x(k);
          if (xk == 0.0) continue;
          const double* Ak = fm.A.data() + (static_cast<std::size_t>(k) + 1) * pp;
          for (std::size_t e = 0; e < pp; ++e) ws.c[e] += Ak[e] * xk;
        }
        factor_diffusion(p, ws.c, ws.chol);
      }
      for (int i = 0; i < p; ++i) ws.xi(i) = rng.normal();
    }

    // X = X_0 + B + X^c + z * (mu - nu): subtract the compensator of the simulated jumps.
    double total = 0.0;
    for (int k = 0; k < fm.n_comp; ++k) {
      const double* coef = fm.intensity.data() + static_cast<std::size_t>(k) * (up + 1);
      double w = coef[0];
      for (int i = 0; i < p; ++i) w += coef[i + 1] * x(i);
      w = std::max(0.0, w);
      ws.intensities[static_cast<std::size_t>(k)] = w;
      total += w;
      const double* mj = fm.mean_jump.data() + static_cast<std::size_t>(k) * up;
      for (int i = 0; i < p; ++i) ws.drift(i) -= w * mj[i];
    }

    for (int i = 0; i < p; ++i) {
      double xn = x(i) + ws.drift(i) * dt;
      if (fm.has_diffusion) {
        double noise = 0.0;
        const double* row = ws.chol.data() + static_cast<std::size_t>(i) * up;
        for (int j = 0; j < p; ++j) noise += row[j] * ws.xi(j);
        xn += noise * sqdt;
      }
      ws.xn(i) = xn;
    }

    if (fm.n_comp > 0) {
      if (!std::isfinite(total)) throw Error(Error::Kind::IntensityInfinite, "jump intensity is not finite");
      integrated += total * dt;
      if (total > 0.0) {
        // Poisson(total * dt) by inversion
        const double mu = total * dt;
        if (mu != ws.last_mu) {
          ws.last_mu = mu;
          ws.last_exp = std::exp(-mu);
        }
        const double uni = rng.uniform();
        double prob = ws.last_exp;
        double cdf = prob;
        int n = 0;
        while (uni > cdf && n < 10000) {
          ++n;
          prob *= mu / n;
          cdf += prob;
        }
        for (int j = 0; j < n; ++j) {
          double pick = rng.uniform() * total;
          int k = 0;
          while (k + 1 < fm.n_comp && pick >= ws.intensities[static_cast<std::size_t>(k)]) {
            pick -= ws.intensities[static_cast<std::size_t>(k)];
            ++k;
          }
          const double* zk = fm.z.data() + static_cast<std::size_t>(k) * up;
          const double r = fm.rate[static_cast<std::size_t>(k)];
          const double size = r > 0.0 ? -std::log(rng.uniform()) / r : 1.0;
          for (int i = 0; i < p; ++i) ws.xn(i) += size * zk[i];
        }
        jumps += static_cast<std::uint32_t>(n);
      }
    }

    if (ctx.cfg.project) {
      using Space = StepContext::Space;
      bool inside = false;
      switch (ctx.space) {
        case Space::Canonical:
          for (int i = 0; i < ctx.space_param; ++i) ws.xn(i) = std::max(ws.xn(i), 0.0);
          inside = true;
          break;
        case Space::PSD:
          inside = psd_cholesky_ok(ws.xn, ctx.space_param);
          break;
        case Space::Lorentz:
          inside = ws.xn(0) >= ws.xn.tail(p - 1).norm();
          break;
        case Space::General:
          break;
      }
      if (!inside && !ctx.model->state_space().contains(ws.xn, 0.0)) ws.xn = ctx.model->state_space().project(ws.xn);
    }
    x.swap(ws.xn);
    sup = std::max(sup, x.squaredNorm());
    if (next_ck < ctx.checkpoint_steps.size() && ctx.checkpoint_steps[next_ck] == step + 1) {
      store(static_cast<int>(next_ck), x);
      ++next_ck;
    }
  }
  out.jump_counts[static_cast<std::size_t>(path)] = jumps;
  out.integrated_intensity[static_cast<std::size_t>(path)] = integrated;
  out.sup_sq_norm[static_cast<std::size_t>(path)] = sup;
}

}  // namespace affine::detail
