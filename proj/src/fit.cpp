#include "mixcure/fit.hpp"

namespace mixcure {

BinGrid make_grid(const Dataset& data, const FitOptions& options) {
  if (options.n_obs_per_bin > 0) return build_bins(data, options.n_obs_per_bin);
  if (options.bins > 0) return build_bins_by_count(data, options.bins);
  return build_bins_by_count(data, default_bin_count(data.size()));
}

FittedModel fit_model(const Dataset& data, const FitOptions& options) {
  BinGrid grid = make_grid(data, options);
  ConstraintMatrix constraints = build_constraints(data, grid);
  FittedModel out{Model(data, std::move(grid)), std::move(constraints), {}, {}, {}};

  if (options.omega) {
    out.fit = fit_fixed_omega(out.model, data, out.constraints, *options.omega, options.solver, options.smoothing);
    out.trace.converged = out.fit.converged();
    out.trace.stop_reason = "fixed smoothing value";
  } else {
    SmoothingResult sel = select_smoothing(out.model, data, out.constraints, options.solver, options.smoothing);
    out.fit = std::move(sel.fit);
    out.trace = std::move(sel.trace);
  }
  if (out.fit.converged()) out.covariance = covariance(out.model, out.fit, out.constraints, options.tol_active);
  return out;
}

}  // namespace mixcure
