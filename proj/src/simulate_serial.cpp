#include <cmath>
#include <string>

#include "affine/error.hpp"
#include "affine/simulate.hpp"
#include "simulate_kernel.hpp"

namespace affine {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || n_paths < 1 || n_checkpoints < 1 || threads < 0)
    throw Error(Error::Kind::InvalidArgument,
                "simulation needs dt > 0, horizon > 0, n_paths >= 1, n_checkpoints >= 1");
}

namespace detail {

StepContext make_context(const AffineModel& model, const Vec& x0, const SimConfig& cfg) {
  cfg.validate();
  require_dim(static_cast<std::size_t>(x0.size()), static_cast<std::size_t>(model.dim()), "x0");
  if (!model.state_space().contains(x0))
    throw Error(Error::Kind::StateSpaceMismatch, "x0 is not in the state space " + model.state_space().name());
  StepContext ctx;
  ctx.model = &model;
  ctx.x0 = x0;
  ctx.cfg = cfg;
  ctx.n_steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / cfg.dt)));
  ctx.dt = cfg.horizon / ctx.n_steps;
  const int n_ck = std::min(cfg.n_checkpoints, ctx.n_steps);
  ctx.checkpoint_steps.push_back(0);
  for (int k = 1; k <= n_ck; ++k)
    ctx.checkpoint_steps.push_back(static_cast<int>(std::lround(static_cast<double>(k) * ctx.n_steps / n_ck)));
  FlatModel& fm = ctx.flat;
  const int p = model.dim();
  fm.p = p;
  fm.a0.assign(model.a0().data(), model.a0().data() + p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) fm.a.push_back(model.a()(i, j));
  for (const Mat& m : model.A()) {
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) fm.A.push_back(m(i, j));
    fm.has_diffusion = fm.has_diffusion || m.cwiseAbs().maxCoeff() > 0.0;
  }
  for (const JumpComponent& comp : model.jump_components()) {
    ++fm.n_comp;
    fm.intensity.insert(fm.intensity.end(), comp.intensity.data(), comp.intensity.data() + p + 1);
    fm.z.insert(fm.z.end(), comp.z.data(), comp.z.data() + p);
    const bool ray = comp.shape == JumpComponent::Shape::Ray;
    for (int i = 0; i < p; ++i) fm.mean_jump.push_back(ray ? comp.z(i) / comp.rate : comp.z(i));
    fm.rate.push_back(ray ? comp.rate : 0.0);
  }
  const StateSpaceKind& kind = model.state_space().kind();
  if (const auto* c = std::get_if<Canonical>(&kind)) {
    ctx.space = StepContext::Space::Canonical;
    ctx.space_param = c->m;
  } else if (const auto* c = std::get_if<PSDCone>(&kind)) {
    ctx.space = StepContext::Space::PSD;
    ctx.space_param = c->d;
  } else if (std::holds_alternative<Lorentz>(kind)) {
    ctx.space = StepContext::Space::Lorentz;
  }
  return ctx;
}

PathEnsemble make_ensemble(const StepContext& ctx) {
  PathEnsemble e;
  e.dim = ctx.model->dim();
  e.n_paths = ctx.cfg.n_paths;
  e.n_steps = ctx.n_steps;
  e.dt = ctx.dt;
  e.checkpoint_steps = ctx.checkpoint_steps;
  for (int s : ctx.checkpoint_steps) e.times.push_back(s * ctx.dt);
  e.states.assign(ctx.checkpoint_steps.size() * static_cast<std::size_t>(e.n_paths) *
                      static_cast<std::size_t>(e.dim),
                  0.0);
  e.jump_counts.assign(static_cast<std::size_t>(e.n_paths), 0);
  e.integrated_intensity.assign(static_cast<std::size_t>(e.n_paths), 0.0);
  e.sup_sq_norm.assign(static_cast<std::size_t>(e.n_paths), 0.0);
  e.model_hash = model_hash(*ctx.model);
  e.config = ctx.cfg;
  return e;
}

}  // namespace detail

PathEnsemble simulate_paths_serial(const AffineModel& model, const Vec& x0, const SimConfig& cfg) {
  const detail::StepContext ctx = detail::make_context(model, x0, cfg);
  PathEnsemble out = detail::make_ensemble(ctx);
  detail::Workspace ws(model.dim());
  for (int path = 0; path < cfg.n_paths; ++path) detail::simulate_one_path(ctx, path, ws, out);
  return out;
}

}  // namespace affine
