#include <exception>

#include "affine/simulate.hpp"
#include "simulate_kernel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affine {

PathEnsemble simulate_paths(const AffineModel& model, const Vec& x0, const SimConfig& cfg) {
  const detail::StepContext ctx = detail::make_context(model, x0, cfg);
  PathEnsemble out = detail::make_ensemble(ctx);
  std::exception_ptr failure;
  const int n = cfg.n_paths;

#ifdef _OPENMP
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
#endif
  {
    detail::Workspace ws(model.dim());
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (int path = 0; path < n; ++path) {
      try {
        detail::simulate_one_path(ctx, path, ws, out);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical(affine_sim_failure)
#endif
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace affine
