#pragma once

#include "mixcure/constraints.hpp"
#include "mixcure/inference.hpp"
#include "mixcure/ip_solver.hpp"
#include "mixcure/model.hpp"
#include "mixcure/smoothing.hpp"

#include <optional>

namespace mixcure {

/// End-to-end fitting options. Bin selection: `n_obs_per_bin` > 0 wins, then
/// `bins` > 0, otherwise round(n^{1/3}) bins.
struct FitOptions {
  int n_obs_per_bin = 0;
  int bins = 0;
  /// Fixed smoothing value; unset means automatic selection.
  std::optional<double> omega;
  SolverConfig solver;
  SmoothingConfig smoothing;
  double tol_active = 1e-6;
};

struct FittedModel {
  Model model;
  ConstraintMatrix constraints;
  FitResult fit;
  SmoothingTrace trace;
  CovarianceResult covariance;

  const BinGrid& grid() const { return model.grid(); }
};

BinGrid make_grid(const Dataset& data, const FitOptions& options);

/// Bins, constraints, smoothing selection (or a fixed-ω fit), and the
/// active-constraint covariance. The covariance is only computed for a
/// converged fit.
FittedModel fit_model(const Dataset& data, const FitOptions& options);

}  // namespace mixcure
