#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "affine/cone.hpp"
#include "affine/error.hpp"
#include "affine/io.hpp"
#include "affine/model.hpp"
#include "affine/riccati.hpp"
#include "affine/simulate.hpp"
#include "affine/transform.hpp"

namespace {

using affine::Complex;
using affine::CVec;
using affine::Vec;
using nlohmann::json;

struct ComplexFlag {
  std::string text;
  std::string re;
  std::string im;

  void add(CLI::App* app, const std::string& name, bool required) {
    auto* opt = app->add_option("--" + name, text, name + " as comma-separated a+bi entries");
    auto* ore = app->add_option("--" + name + "-re", re, "real parts of " + name);
    auto* oim = app->add_option("--" + name + "-im", im, "imaginary parts of " + name);
    opt->excludes(ore)->excludes(oim);
    if (required) opt->required(false);
    required_ = required;
  }

  CVec value(const std::string& name) const {
    if (!text.empty()) return affine::parse_complex_vector(text);
    if (re.empty()) {
      throw affine::Error(affine::Error::Kind::InvalidArgument, "missing --" + name);
    }
    const Vec r = affine::parse_real_vector(re);
    const Vec i = im.empty() ? Vec::Zero(r.size()) : affine::parse_real_vector(im);
    affine::require_dim(static_cast<std::size_t>(i.size()), static_cast<std::size_t>(r.size()),
                        (name + "-im").c_str());
    CVec out(r.size());
    for (Eigen::Index k = 0; k < r.size(); ++k) out(k) = Complex(r(k), i(k));
    return out;
  }

 private:
  bool required_ = false;
};

struct Common {
  std::string model_path;
  bool csv = false;
  double rtol = 1e-10;
  double atol = 1e-12;

  void add(CLI::App* app) {
    app->add_option("--model", model_path, "model JSON file")->required();
    app->add_option("--rtol", rtol, "relative ODE tolerance");
    app->add_option("--atol", atol, "absolute ODE tolerance");
  }
  affine::SolverConfig solver() const {
    affine::SolverConfig cfg;
    cfg.rel_tol = rtol;
    cfg.abs_tol = atol;
    return cfg;
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("AFFINE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw affine::Error(affine::Error::Kind::InvalidArgument, "AFFINE_SEED is not an integer");
    }
  }
  return 0;
}

void emit(const json& out) { std::cout << out.dump(2) << '\n'; }

void require_real(const CVec& u, const char* what) {
  if (u.imag().cwiseAbs().maxCoeff() != 0.0)
    throw affine::Error(affine::Error::Kind::InvalidArgument, std::string(what) + " must be real");
}

json validate_model(const affine::AffineModel& model, int samples, std::uint64_t seed) {
  json out;
  const affine::AdmissibilityReport rep = affine::check_admissibility(model, samples, seed);
  out["admissibility"] = affine::to_json(rep);
  json moments = json::array();
  for (bool b : affine::exponential_moment_condition(model)) moments.push_back(b);
  out["exponential_moments"] = moments;

  // invariant suite on sampled points
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const auto& space = model.state_space();
  std::normal_distribution<double> normal;
  double affine_resid = 0.0;
  double min_k = std::numeric_limits<double>::infinity();
  bool projection_ok = true;
  for (int k = 0; k < samples; ++k) {
    const Vec x = space.sample_interior(rng);
    const Vec y = space.sample_boundary(rng);
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Vec mix = alpha * x + (1.0 - alpha) * y;
    affine_resid = std::max(affine_resid, (affine::drift_at(model, mix) - alpha * affine::drift_at(model, x) -
                                           (1.0 - alpha) * affine::drift_at(model, y))
                                              .cwiseAbs()
                                              .maxCoeff());
    affine_resid = std::max(affine_resid, (affine::diffusion_at(model, mix) -
                                           alpha * affine::diffusion_at(model, x) -
                                           (1.0 - alpha) * affine::diffusion_at(model, y))
                                              .cwiseAbs()
                                              .maxCoeff());
    Vec dir(model.dim());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = normal(rng);
    const Vec far = 10.0 * dir;
    projection_ok = projection_ok && space.contains(space.project(far));
    try {
      min_k = std::min(min_k, affine::k_eval(model, x, 0.5 * dir));
    } catch (const affine::Error& e) {
      if (e.kind() != affine::Error::Kind::DivergentIntegral) throw;
    }
  }
  out["affine_residual"] = affine_resid;
  out["min_k"] = std::isfinite(min_k) ? json(min_k) : json(nullptr);
  out["projection_membership"] = projection_ok;
  const bool pass = rep.pass && affine_resid <= 1e-12 && projection_ok && !(min_k < -1e-10);
  out["verdict"] = pass ? "pass" : "fail";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine jump-diffusion toolkit: Riccati solves, transforms, explosion probes and simulation"};
  app.require_subcommand(1);
  std::string failing = "cli";

  Common common;
  ComplexFlag u_flag;
  ComplexFlag v_flag;
  std::string x_text;
  double T = 1.0;
  double t_max = 10.0;
  double lambda_max = 1e3;
  int samples = 200;
  std::optional<std::uint64_t> seed;
  int paths = 10000;
  double dt = 1e-3;
  int checkpoints = 10;
  int threads = 0;
  bool no_project = false;
  std::vector<int> n_list{10, 100, 1000};
  int n_scale = 2;
  std::string cone_action;

  auto* solve = app.add_subcommand("solve", "solve the Riccati system from u up to T");
  common.add(solve);
  u_flag.add(solve, "u", true);
  solve->add_option("--T", T, "horizon")->required();
  solve->add_flag("--csv", common.csv, "emit the trajectory as CSV");

  auto* explosion = app.add_subcommand("explosion", "explosion time of the Riccati solution started at u");
  common.add(explosion);
  u_flag.add(explosion, "u", true);
  explosion->add_option("--t-max", t_max, "search horizon")->required();

  auto* transform = app.add_subcommand("transform", "E_x exp(u^T X_t)");
  common.add(transform);
  u_flag.add(transform, "u", true);
  transform->add_option("--x", x_text, "initial state")->required();
  transform->add_option("--t", T, "time")->required();

  auto* ray = app.add_subcommand("ray", "effective domain along a real direction");
  common.add(ray);
  ray->add_option("--direction", x_text, "direction")->required();
  ray->add_option("--T", T, "horizon")->required();
  ray->add_option("--lambda-max", lambda_max, "largest multiplier probed");
  ray->add_flag("--csv", common.csv, "emit probe table as CSV");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths of the Euler scheme");
  common.add(simulate);
  simulate->add_option("--x0", x_text, "initial state")->required();
  simulate->add_option("--T", T, "horizon");
  simulate->add_option("--paths", paths, "number of paths");
  simulate->add_option("--dt", dt, "time step");
  simulate->add_option("--seed", seed, "seed (defaults to AFFINE_SEED, then 0)");
  simulate->add_option("--checkpoints", checkpoints, "stored checkpoints");
  simulate->add_option("--threads", threads, "worker threads (0 = runtime default)");
  simulate->add_flag("--no-project", no_project, "skip projection onto the state space");
  u_flag.add(simulate, "u", false);
  simulate->add_flag("--csv", common.csv, "emit per-checkpoint summary as CSV");

  auto* validate = app.add_subcommand("validate", "admissibility and invariant checks");
  common.add(validate);
  validate->add_option("--samples", samples, "sampled points");
  validate->add_option("--seed", seed, "seed (defaults to AFFINE_SEED, then 0)");

  auto* damp = app.add_subcommand("damp", "transforms of the damped models");
  common.add(damp);
  u_flag.add(damp, "u", true);
  damp->add_option("--x", x_text, "initial state")->required();
  damp->add_option("--t", T, "time")->required();
  damp->add_option("--n", n_list, "damping indices")->delimiter(',');

  auto* idcheck = app.add_subcommand("idcheck", "infinite divisibility residual");
  common.add(idcheck);
  u_flag.add(idcheck, "u", true);
  idcheck->add_option("--t", T, "time")->required();
  idcheck->add_option("--n", n_scale, "scaling factor")->required();

  auto* cone = app.add_subcommand("cone-check", "self-dual cone checks");
  common.add(cone);
  cone->add_option("action", cone_action, "monotonicity | interior | regularity")
      ->required()
      ->check(CLI::IsMember({"monotonicity", "interior", "regularity"}));
  u_flag.add(cone, "u", true);
  v_flag.add(cone, "v", false);
  cone->add_option("--t", T, "time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    failing = "load_model";
    const affine::AffineModel model = affine::load_model(common.model_path);
    const affine::SolverConfig cfg = common.solver();

    if (*solve) {
      failing = "solve_riccati";
      const auto sol = affine::solve_riccati(model, u_flag.value("u"), T, cfg);
      if (common.csv) std::cout << affine::solution_csv(sol);
      else emit(affine::to_json(sol));
    } else if (*explosion) {
      failing = "explosion_time";
      emit(affine::to_json(affine::explosion_time(model, u_flag.value("u"), t_max, cfg)));
    } else if (*transform) {
      failing = "transform";
      emit(affine::to_json(affine::transform(model, u_flag.value("u"), affine::parse_real_vector(x_text), T, cfg)));
    } else if (*ray) {
      failing = "effective_domain_ray";
      const auto probe = affine::effective_domain_ray(model, affine::parse_real_vector(x_text), T, lambda_max, cfg);
      if (common.csv) std::cout << affine::ray_probe_csv(probe);
      else emit(affine::to_json(probe));
    } else if (*simulate) {
      failing = "simulate_paths";
      affine::SimConfig sc;
      sc.n_paths = paths;
      sc.dt = dt;
      sc.horizon = T;
      sc.seed = seed ? *seed : default_seed();
      sc.n_checkpoints = checkpoints;
      sc.project = !no_project;
      sc.threads = threads;
      const auto ens = affine::simulate_paths(model, affine::parse_real_vector(x_text), sc);
      if (common.csv) {
        std::cout << affine::ensemble_summary_csv(ens);
      } else {
        json out;
        out["verdict"] = "simulated";
        out["seed"] = sc.seed;
        out["n_paths"] = ens.n_paths;
        out["n_steps"] = ens.n_steps;
        out["dt"] = ens.dt;
        out["times"] = ens.times;
        json means = json::array();
        for (int ck = 0; ck <= ens.last_checkpoint(); ++ck) {
          Vec m = Vec::Zero(ens.dim);
          for (int path = 0; path < ens.n_paths; ++path) m += ens.state(ck, path);
          m /= ens.n_paths;
          means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
        }
        out["means"] = means;
        double jumps = 0.0;
        for (auto j : ens.jump_counts) jumps += j;
        out["mean_jump_count"] = jumps / ens.n_paths;
        out["sup_moment"] = affine::sup_moment(ens);
        if (!u_flag.text.empty() || !u_flag.re.empty()) {
          failing = "mc_transform";
          const CVec u = u_flag.value("u");
          out["mc_transform"] = affine::to_json(affine::mc_transform(ens, u));
        }
        emit(out);
      }
    } else if (*validate) {
      failing = "check_admissibility";
      emit(validate_model(model, samples, seed ? *seed : default_seed()));
    } else if (*damp) {
      failing = "damped_transform_sequence";
      emit(affine::to_json(affine::damped_transform_sequence(model, u_flag.value("u"),
                                                             affine::parse_real_vector(x_text), T, n_list, cfg)));
    } else if (*idcheck) {
      failing = "infinite_divisibility_check";
      const double r = affine::infinite_divisibility_check(model, u_flag.value("u"), T, n_scale, cfg);
      emit({{"verdict", r < 1e-8 ? "pass" : "fail"}, {"residual", r}, {"n", n_scale}, {"t", T}});
    } else if (*cone) {
      if (cone_action == "monotonicity") {
        failing = "monotonicity_check";
        const CVec u = u_flag.value("u");
        const CVec v = v_flag.value("v");
        require_real(u, "u");
        require_real(v, "v");
        const auto r = affine::monotonicity_check(model, u.real(), v.real(), T, cfg);
        emit({{"verdict", r.pass ? "pass" : "fail"},
              {"min_psi0_gap", r.min_psi0_gap},
              {"max_cone_slack", r.max_cone_slack},
              {"tolerance", r.tolerance}});
      } else if (cone_action == "interior") {
        failing = "interior_preservation_check";
        const auto r = affine::interior_preservation_check(model, u_flag.value("u"), T, cfg);
        emit({{"verdict", r.pass ? "pass" : "fail"}, {"exploded", r.exploded}, {"min_margin", r.min_margin}});
      } else {
        failing = "regularity_Lu_check";
        const CVec u = u_flag.value("u");
        require_real(u, "u");
        const bool ok = affine::regularity_Lu_check(model, u.real());
        emit({{"verdict", ok ? "pass" : "fail"}});
      }
    }
  } catch (const affine::Error& e) {
    std::cerr << "error in " << failing << " [" << affine::to_string(e.kind()) << "]: " << e.what() << '\n';
    return e.is_validation() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error in " << failing << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
