#pragma once

#include "mixcure/ip_solver.hpp"

#include <Eigen/Core>

#include <vector>

namespace mixcure {

struct SmoothingConfig {
  int max_outer = 20;
  /// Stop once consecutive degrees of freedom differ by less than this.
  double df_tol = 1.0;
  /// Alternate stop on relative σ² change.
  double rel_sigma2_tol = 1e-3;
  /// σ² floor, i.e. ω ≤ 1/(2·floor).
  double sigma2_floor = 1e-8;
  /// Initial ω makes the penalty this share of |ℓ| at the starting point.
  double initial_penalty_share = 0.01;
  /// The anchor fit that seeds every inner fit uses this multiple of the
  /// initial ω.
  double anchor_factor = 1e5;
};

struct SmoothingRecord {
  double sigma2 = 0.0;
  double omega = 0.0;
  double nu = 0.0;
  double df = 0.0;  // m − ν
  double objective = 0.0;
  double log_marginal = 0.0;  // Laplace surrogate, diagnostic only
  int solver_iterations = 0;
};

struct SmoothingTrace {
  std::vector<SmoothingRecord> records;
  std::size_t final_index = 0;
  bool converged = false;
  std::string stop_reason;
};

struct SmoothingResult {
  double omega = 0.0;
  FitResult fit;
  SmoothingTrace trace;
};

/// ν = tr{(Ĝ + Q)⁻¹ Q} where Q is zero except for R/σ² in the leading m × m
/// (θ) block.
double degrees_of_freedom(const Eigen::MatrixXd& g_hat, const Eigen::MatrixXd& r, double sigma2);

/// −(m/2) log σ² + ℓ − θᵀRθ/(2σ²) − ½ log|Ĝ + Q|.
double log_marginal_surrogate(double loglik, double roughness, const Eigen::MatrixXd& g_hat,
                              const Eigen::MatrixXd& r, double sigma2);

/// ω whose penalty is `initial_penalty_share` of |ℓ| at the flat start; 0 when
/// the penalty cannot be scaled.
double initial_omega(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                     const SmoothingConfig& config = {});

/// The fixed starting points plus, when the anchor fit converges, a warm start
/// from the fit at `anchor_omega`.
std::vector<SolverState> anchored_starts(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                                         const SolverConfig& solver, double anchor_omega);

/// Best fit at a fixed ω over the anchored starts.
FitResult fit_fixed_omega(const Model& model, const Dataset& data, const ConstraintMatrix& constraints, double omega,
                          const SolverConfig& solver, const SmoothingConfig& config = {});

/// Alternates penalized fits with the update σ² ← θ̂ᵀRθ̂ / (m − ν).
SmoothingResult select_smoothing(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                                 const SolverConfig& solver, const SmoothingConfig& config = {});

}  // namespace mixcure
