#pragma once

#include "mixcure/fit.hpp"
#include "mixcure/simgen.hpp"

#include <array>
#include <string>
#include <vector>

namespace mixcure {

struct ParameterMetrics {
  std::string name;
  double truth = 0.0;
  double abias = 0.0;  // |mean(estimate) − truth|
  double mcsd = 0.0;   // sample SD of estimates
  double aasd = 0.0;   // mean asymptotic SE
  double mse = 0.0;
  double cp = 0.0;     // Wald 95% coverage
  std::size_t count = 0;
};

/// Metrics for one parameter from per-replicate estimates and SEs.
ParameterMetrics compute_metrics(const std::string& name, double truth, const std::vector<double>& estimates,
                                 const std::vector<double>& ses);

/// Everything kept from one simulated replicate.
struct ReplicateOutcome {
  std::size_t index = 0;
  bool converged = false;
  std::string failure;
  std::vector<double> estimate;  // α1, α2, β1, γ1, γ2
  std::vector<double> se;
  std::array<double, 3> hazard_time{};  // 25th/50th/75th percentile of latent event times
  std::array<double, 3> hazard_estimate{};
  std::array<double, 3> hazard_se{};
  double ise = 0.0;
  double ise_horizon = 0.0;
  double non_cured_fraction = 0.0;
  double right_censored_fraction = 0.0;
  Eigen::Index bins = 0;
  double omega = 0.0;
  int solver_iterations = 0;
  int smoothing_iterations = 0;
};

struct MetricReport {
  Scenario scenario;
  std::size_t reps = 0;
  std::size_t converged = 0;
  std::vector<ParameterMetrics> parameters;
  std::array<ParameterMetrics, 3> hazard{};
  double aise = 0.0;
  double mean_non_cured = 0.0;
  double mean_right_censored = 0.0;
  double mean_bins = 0.0;

  double exclusion_rate() const { return reps ? 1.0 - static_cast<double>(converged) / static_cast<double>(reps) : 0.0; }
  const ParameterMetrics& parameter(const std::string& name) const;
};

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

/// ∫₀^{t0} (h₀(t) − ĥ₀(t))² dt by the trapezoid rule on `points` nodes.
double integrated_squared_error(const BinGrid& grid, const Eigen::VectorXd& theta, double t0, int points = 200);

/// Simulates replicate `index` of the scenario (seed stream `index`) and fits it.
ReplicateOutcome run_replicate(const Scenario& scenario, std::size_t index, const FitOptions& options);

/// Aggregates outcomes in index order; non-converged replicates are excluded
/// and counted. Throws std::runtime_error when none converged.
MetricReport aggregate(const Scenario& scenario, std::vector<ReplicateOutcome> outcomes);

/// Runs replicates 0..reps−1 on `jobs` worker threads, results in index order.
std::vector<ReplicateOutcome> run_replicates(const Scenario& scenario, std::size_t reps, const FitOptions& options,
                                             unsigned jobs = 1);

MetricReport run_replications(const Scenario& scenario, std::size_t reps, const FitOptions& options,
                              unsigned jobs = 1);

/// Fit options the scenario implies (n_obs_per_bin from the scenario).
FitOptions scenario_fit_options(const Scenario& scenario, FitOptions base = {});

}  // namespace mixcure
