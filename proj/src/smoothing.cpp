#include "mixcure/smoothing.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace mixcure {

namespace {

Eigen::MatrixXd penalized_curvature(const Eigen::MatrixXd& g_hat, const Eigen::MatrixXd& r, double sigma2) {
  const Eigen::Index m = r.rows();
  if (g_hat.rows() != g_hat.cols() || g_hat.rows() < m) throw std::invalid_argument("degrees_of_freedom: bad shapes");
  Eigen::MatrixXd a = g_hat;
  a.topLeftCorner(m, m) += r / sigma2;
  return a;
}

// Symmetric pseudo-inverse pieces of A. Directions with negligible curvature
// (e.g. a diverging incidence coefficient) are dropped rather than inverted.
struct Spectrum {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  Eigen::Array<bool, Eigen::Dynamic, 1> kept;
};

Spectrum spectrum(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("degrees_of_freedom: eigen-decomposition failed");
  Spectrum sp{es.eigenvectors(), es.eigenvalues(), {}};
  const double scale = sp.values.size() ? sp.values.cwiseAbs().maxCoeff() : 0.0;
  sp.kept = sp.values.array().abs() > 1e-12 * std::max(scale, 1e-300);
  return sp;
}

}  // namespace

double degrees_of_freedom(const Eigen::MatrixXd& g_hat, const Eigen::MatrixXd& r, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("degrees_of_freedom: sigma2 must be positive");
  const Eigen::Index m = r.rows(), v = g_hat.rows();
  if (m == 0) return 0.0;
  const Spectrum sp = spectrum(penalized_curvature(g_hat, r, sigma2));
  // tr(A⁺Q) = Σ_k (u_kᵀ Q u_k) / d_k with Q supported on the θ block
  double nu = 0.0;
  for (Eigen::Index k = 0; k < v; ++k) {
    if (!sp.kept(k)) continue;
    const auto u = sp.vectors.col(k).head(m);
    nu += u.dot(r * u) / sigma2 / sp.values(k);
  }
  return nu;
}

double log_marginal_surrogate(double loglik, double roughness, const Eigen::MatrixXd& g_hat,
                              const Eigen::MatrixXd& r, double sigma2) {
  const auto m = static_cast<double>(r.rows());
  const Spectrum sp = spectrum(penalized_curvature(g_hat, r, sigma2));
  double log_abs_det = 0.0;
  for (Eigen::Index k = 0; k < sp.values.size(); ++k)
    if (sp.kept(k)) log_abs_det += std::log(std::abs(sp.values(k)));
  return -0.5 * m * std::log(sigma2) + loglik - roughness / (2.0 * sigma2) - 0.5 * log_abs_det;
}

double initial_omega(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                     const SmoothingConfig& config) {
  const SolverState cold = initialize(data, model.layout(), constraints);
  const ParamVector start(model.layout(), cold.eta);
  const double loglik = model.log_likelihood(start);
  double rough = model.roughness(start.theta());
  const double level = start.theta().mean();
  const double flat = level * level * model.penalty().trace();
  // a constant θ sits in the penalty null space; use a level-scaled trace
  if (!(rough > 1e-12 * flat)) rough = flat;
  if (!(rough > 0.0)) return 0.0;
  return config.initial_penalty_share * std::max(std::abs(loglik), 1.0) / rough;
}

std::vector<SolverState> anchored_starts(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                                         const SolverConfig& solver, double anchor_omega) {
  std::vector<SolverState> starts = default_starts(data, model.grid(), model.layout(), constraints);
  if (model.layout().m < 3 || !(anchor_omega > 0.0)) return starts;
  const FitResult anchor = solve_best(model, constraints, anchor_omega, solver, starts);
  if (anchor.converged())
    starts.push_back(warm_start(anchor.eta.values(), initialize(data, model.layout(), constraints), constraints));
  return starts;
}

FitResult fit_fixed_omega(const Model& model, const Dataset& data, const ConstraintMatrix& constraints, double omega,
                          const SolverConfig& solver, const SmoothingConfig& config) {
  const double anchor = std::max(omega, config.anchor_factor * initial_omega(model, data, constraints, config));
  return solve_best(model, constraints, omega, solver, anchored_starts(model, data, constraints, solver, anchor));
}

SmoothingResult select_smoothing(const Model& model, const Dataset& data, const ConstraintMatrix& constraints,
                                 const SolverConfig& solver, const SmoothingConfig& config) {
  const Eigen::Index m = model.layout().m;
  const SolverState cold = initialize(data, model.layout(), constraints);
  SmoothingResult result;

  if (m < 3) {
    result.fit =
        solve_best(model, constraints, 0.0, solver, default_starts(data, model.grid(), model.layout(), constraints));
    result.omega = 0.0;
    result.trace.converged = result.fit.converged();
    result.trace.stop_reason = "fewer than three bins; unpenalized fit";
    return result;
  }

  const Eigen::MatrixXd& r = model.penalty();
  const double omega0 = initial_omega(model, data, constraints, config);
  double sigma2 = omega0 > 0.0 ? std::max(1.0 / (2.0 * omega0), config.sigma2_floor) : 1.0;
  // Φ has several local maxima in γ; a heavily smoothed fit reliably finds
  // the basin with a finite incidence estimate, and its solution seeds every
  // later fit alongside the fixed starts and the previous iterate.
  const std::vector<SolverState> starts =
      anchored_starts(model, data, constraints, solver, config.anchor_factor * omega0);

  Eigen::VectorXd previous_eta;
  for (int k = 0; k < config.max_outer; ++k) {
    const double omega = 1.0 / (2.0 * sigma2);
    std::vector<SolverState> candidates = starts;
    if (previous_eta.size()) candidates.push_back(warm_start(previous_eta, cold, constraints));
    FitResult fit = solve_best(model, constraints, omega, solver, candidates);
    if (!fit.converged()) {
      result.fit = std::move(fit);
      result.omega = omega;
      result.trace.stop_reason = "inner fit did not converge";
      return result;
    }
    const Eigen::MatrixXd g_hat = -model.hessian(fit.eta, 0.0);
    const double nu = degrees_of_freedom(g_hat, r, sigma2);
    const double rough = model.roughness(fit.eta.theta());

    SmoothingRecord rec;
    rec.sigma2 = sigma2;
    rec.omega = omega;
    rec.nu = nu;
    rec.df = static_cast<double>(m) - nu;
    rec.objective = fit.objective;
    rec.log_marginal = log_marginal_surrogate(fit.loglik, rough, g_hat, r, sigma2);
    rec.solver_iterations = fit.iterations;
    result.trace.records.push_back(rec);
    result.trace.final_index = result.trace.records.size() - 1;
    previous_eta = fit.eta.values();
    result.fit = std::move(fit);
    result.omega = omega;

    const auto& recs = result.trace.records;
    if (recs.size() >= 2 && std::abs(recs.back().df - recs[recs.size() - 2].df) < config.df_tol) {
      result.trace.converged = true;
      result.trace.stop_reason = "degrees of freedom stabilized";
      return result;
    }
    const double denom = static_cast<double>(m) - nu;
    if (!(denom > 0.0)) {
      result.trace.converged = true;
      result.trace.stop_reason = "degenerate σ² ratio; σ² held";
      return result;
    }
    const double next = std::max(rough / denom, config.sigma2_floor);
    if (std::abs(next - sigma2) < config.rel_sigma2_tol * sigma2) {
      result.trace.converged = true;
      result.trace.stop_reason = "σ² stabilized";
      return result;
    }
    sigma2 = next;
  }
  result.trace.stop_reason = "outer iteration limit reached";
  return result;
}

}  // namespace mixcure
