#pragma once

#include "mixcure/constraints.hpp"
#include "mixcure/core_types.hpp"
#include "mixcure/model.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mixcure {

struct SolverConfig {
  double epsilon = 0.6;  // backtracking ratio
  double zeta = 0.1;     // neighborhood: λ_b s_b ≥ ζ μ
  double xi = 0.1;       // centering
  double mu_tol = 1e-8;
  int max_iter = 500;
  /// Stationarity tolerance relative to 1 + ‖∇Φ‖∞.
  double kkt_tol = 1e-6;
  int max_backtracks = 60;
  /// Residual bound of the neighbourhood: ‖∇Φ + Mᵀλ‖∞/μ may grow to at most
  /// β times its starting value.
  double beta = 10.0;
  bool equilibrate = true;
  double shift_start = 1e-8;
  double shift_max = 1e12;

  void validate() const;
};

enum class SolverStatus { Converged, MaxIterations, LineSearchFailure, SingularSystem };

const char* to_string(SolverStatus status);

/// Primal-dual iterate. s = Mη holds at every iterate up to rounding.
struct SolverState {
  Eigen::VectorXd eta;
  Eigen::VectorXd lambda;
  Eigen::VectorXd s;
  int iteration = 0;

  double mu() const { return lambda.size() ? lambda.dot(s) / static_cast<double>(lambda.size()) : 0.0; }
};

struct NewtonDirection {
  Eigen::VectorXd d_eta;
  Eigen::VectorXd d_lambda;
  Eigen::VectorXd d_s;
  double shift = 0.0;  // relative diagonal shift τ used, 0 if none
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitResult {
  ParamVector eta;
  Eigen::VectorXd lambda;
  Eigen::VectorXd slack;
  double omega = 0.0;
  SolverStatus status = SolverStatus::MaxIterations;
  int iterations = 0;
  double mu = 0.0;
  double dual_residual = 0.0;  // ‖∇Φ + Mᵀλ‖∞
  double primal_residual = 0.0;  // ‖s − Mη‖∞
  double gradient_norm = 0.0;  // ‖∇Φ‖∞
  double objective = 0.0;      // Φ(η̂)
  double loglik = 0.0;         // ℓ(η̂)
  double max_shift = 0.0;
  std::string message;

  bool converged() const { return status == SolverStatus::Converged; }
};

/// β = α = γ = 0, θ ≡ max(events / Σ t̃, 1e-3), λ = 1, s = Mη.
SolverState initialize(const Dataset& data, const ParamLayout& layout, const ConstraintMatrix& constraints);

/// Same as `initialize` but θ follows a pooled occurrence/exposure estimate.
/// Each censored time is imputed at its interval midpoint (left-censored at
/// t_R/2); the ratio is pooled over a window of neighbouring bins.
SolverState initialize_crude_hazard(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                    const ConstraintMatrix& constraints);

/// Known-susceptible start: subjects that are not right-censored. θ is their
/// crude hazard and γ a logistic fit of the known-susceptible indicator on z.
SolverState initialize_incidence(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                 const ConstraintMatrix& constraints);

/// Starting points tried by `solve_best`: the flat, crude-hazard and incidence starts.
std::vector<SolverState> default_starts(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                        const ConstraintMatrix& constraints);

/// Strictly interior restart near a previous solution: η is pulled 10% of the
/// way towards the crude initial point and λ is chosen so that every λ_b s_b
/// equals the mean slack.
SolverState warm_start(const Eigen::VectorXd& previous_eta, const SolverState& cold,
                       const ConstraintMatrix& constraints);

/// Newton step on the perturbed KKT system
///   ∇²Φ dη + Mᵀ dλ = −(∇Φ + Mᵀλ)
///   −M dη + ds     = −(s − Mη)
///   S dλ + Λ ds    = −(λ∘s − ξμ 1)
/// via the reduced system (−∇²Φ + Mᵀ S⁻¹Λ M) dη = rhs. The reduced matrix A
/// is factored after symmetric scaling by |diag A|^{-1/2}; on failure A + τ|diag A|
/// is tried with τ escalating ×10 from `shift_start`.
NewtonDirection newton_direction(const SolverState& state, const Eigen::VectorXd& gradient,
                                 const Eigen::MatrixXd& hessian, const SparseRowMatrix& m, double xi,
                                 const SolverConfig& config = {});

/// Extra acceptance test on a trial (η, λ, μ).
using Admissible = std::function<bool(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;

/// First α in {1, ε, ε², ...} such that the trial point is interior, lies in
/// {λ_b s_b ≥ ζ μ}, satisfies μ⁺ ≤ (1 − 0.01α) μ, and passes `admissible`.
std::optional<double> step_length(const SolverState& state, const NewtonDirection& direction,
                                  const SolverConfig& config, const Admissible& admissible = {});

/// Maximizes Φ = ℓ − ω θᵀRθ subject to Mη ≥ 0.
FitResult solve(const Model& model, const ConstraintMatrix& constraints, double omega, const SolverConfig& config,
                const SolverState& start);

FitResult solve(const Model& model, const Dataset& data, const ConstraintMatrix& constraints, double omega,
                const SolverConfig& config = {});

/// Solves from every start and keeps the converged fit with the largest Φ.
/// Φ is not concave in γ, so different starts can end in different local
/// maxima. When no start converges the first start's result is returned.
FitResult solve_best(const Model& model, const ConstraintMatrix& constraints, double omega, const SolverConfig& config,
                     const std::vector<SolverState>& starts);

}  // namespace mixcure
