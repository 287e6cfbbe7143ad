#include "mixcure/ip_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixcure {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("zeta must lie in (0, 1)");
  if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("xi must lie in [0, 1]");
  if (!(mu_tol > 0.0)) throw std::invalid_argument("mu_tol must be positive");
  if (max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
  if (max_backtracks <= 0) throw std::invalid_argument("max_backtracks must be positive");
  if (!(beta >= 1.0)) throw std::invalid_argument("beta must be at least 1");
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::LineSearchFailure: return "line_search_failure";
    case SolverStatus::SingularSystem: return "singular_system";
  }
  return "unknown";
}

SolverState initialize(const Dataset& data, const ParamLayout& layout, const ConstraintMatrix& constraints) {
  double exposure = 0.0;
  for (const Subject& s : data.subjects) exposure += s.follow_up_end();
  const auto events = static_cast<double>(data.count(CensoringKind::Event));
  const double crude = exposure > 0.0 ? std::max(events / exposure, 1e-3) : 1e-3;

  SolverState state;
  state.eta = Eigen::VectorXd::Zero(layout.size());
  state.eta.head(layout.m).setConstant(crude);
  state.s = constraints.matrix() * state.eta;
  state.lambda = Eigen::VectorXd::Ones(constraints.rows());
  return state;
}

namespace {

/// Events over exposure per bin, pooled over a moving window of bins.
/// Right-censored subjects add exposure unless `susceptible_only`.
SolverState crude_hazard_state(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                               const ConstraintMatrix& constraints, bool susceptible_only) {
  SolverState state = initialize(data, layout, constraints);
  const Eigen::Index m = grid.m();
  if (m != layout.m) throw std::invalid_argument("grid and layout disagree on the number of bins");
  Eigen::VectorXd events = Eigen::VectorXd::Zero(m), exposure = Eigen::VectorXd::Zero(m);
  const auto& edges = grid.edges();
  for (const Subject& s : data.subjects) {
    double t = s.t_left;
    bool event = true;
    switch (s.kind) {
      case CensoringKind::Event: break;
      case CensoringKind::Left: t = 0.5 * s.t_right; break;
      case CensoringKind::Interval: t = 0.5 * (s.t_left + s.t_right); break;
      case CensoringKind::Right: event = false; break;
    }
    if (!event && susceptible_only) continue;
    if (event) events(grid.bin_of(std::min(t, grid.upper()))) += 1.0;
    for (Eigen::Index u = 0; u < m; ++u) {
      const double lo = edges[static_cast<std::size_t>(u)];
      if (t <= lo) break;
      exposure(u) += std::min(t, edges[static_cast<std::size_t>(u) + 1]) - lo;
    }
  }
  const double floor = state.eta.size() && m ? state.eta(0) * 1e-2 : 1e-3;
  const Eigen::Index half = std::max<Eigen::Index>(2, m / 15);
  for (Eigen::Index u = 0; u < m; ++u) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, u - half), len = std::min(m - 1, u + half) - lo + 1;
    const double e = exposure.segment(lo, len).sum();
    state.eta(u) = std::max(e > 0.0 ? events.segment(lo, len).sum() / e : 0.0, floor);
  }
  state.s = constraints.matrix() * state.eta;
  return state;
}

}  // namespace

SolverState initialize_crude_hazard(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                    const ConstraintMatrix& constraints) {
  return crude_hazard_state(data, grid, layout, constraints, false);
}

SolverState initialize_incidence(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                 const ConstraintMatrix& constraints) {
  SolverState state = crude_hazard_state(data, grid, layout, constraints, true);
  const Eigen::Index q = layout.q;
  if (q == 0) return state;
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd z(n, q);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Subject& s = data.subjects[static_cast<std::size_t>(i)];
    z.row(i) = s.z.transpose();
    y(i) = s.kind == CensoringKind::Right ? 0.0 : 1.0;
  }
  // no-intercept logistic regression of the known-susceptible indicator on z;
  // the small ridge keeps separated samples finite
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(q);
  for (int it = 0; it < 50; ++it) {
    const Eigen::ArrayXd p = (1.0 / (1.0 + (-(z * gamma).array()).exp()));
    const Eigen::VectorXd grad = z.transpose() * (y.array() - p).matrix() - 1e-3 * gamma;
    Eigen::MatrixXd info = z.transpose() * (p * (1.0 - p)).matrix().asDiagonal() * z;
    info.diagonal().array() += 1e-3;
    const Eigen::VectorXd step = info.ldlt().solve(grad);
    if (!step.allFinite()) break;
    gamma += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  if (gamma.allFinite()) state.eta.segment(layout.gamma_offset(), q) = gamma.cwiseMax(-10.0).cwiseMin(10.0);
  state.s = constraints.matrix() * state.eta;
  return state;
}

std::vector<SolverState> default_starts(const Dataset& data, const BinGrid& grid, const ParamLayout& layout,
                                        const ConstraintMatrix& constraints) {
  return {initialize(data, layout, constraints), initialize_crude_hazard(data, grid, layout, constraints),
          initialize_incidence(data, grid, layout, constraints)};
}

SolverState warm_start(const Eigen::VectorXd& previous_eta, const SolverState& cold,
                       const ConstraintMatrix& constraints) {
  SolverState state;
  state.eta = 0.9 * previous_eta + 0.1 * cold.eta;
  state.s = constraints.matrix() * state.eta;
  // perfectly centred: λ_b s_b equal to the mean slack for every row
  const double level = state.s.size() ? state.s.mean() : 0.0;
  state.lambda = (level / state.s.array()).matrix();
  return state;
}

NewtonDirection newton_direction(const SolverState& state, const Eigen::VectorXd& gradient,
                                 const Eigen::MatrixXd& hessian, const SparseRowMatrix& m, double xi,
                                 const SolverConfig& config) {
  const double mu = state.mu();
  const Eigen::VectorXd r_dual = gradient + m.transpose() * state.lambda;
  const Eigen::VectorXd r_primal = state.s - m * state.eta;
  const Eigen::VectorXd r_comp = (state.lambda.array() * state.s.array() - xi * mu).matrix();
  const Eigen::VectorXd ratio = (state.lambda.array() / state.s.array()).matrix();

  Eigen::MatrixXd reduced = -hessian;
  {
    const SparseRowMatrix weighted = ratio.asDiagonal() * m;
    const Eigen::SparseMatrix<double> gram = Eigen::SparseMatrix<double>(m.transpose()) * weighted;
    reduced += Eigen::MatrixXd(gram);
  }
  const Eigen::VectorXd corr = ((r_comp.array() - state.lambda.array() * r_primal.array()) / state.s.array()).matrix();
  const Eigen::VectorXd rhs = r_dual - m.transpose() * corr;

  // Jacobi equilibration: active rows put entries of order μ/s² on the
  // diagonal, which would swamp the rest of the matrix in rounding.
  const Eigen::VectorXd diag = reduced.diagonal().cwiseAbs();
  const double floor = std::max(diag.maxCoeff(), 1.0) * 1e-14;
  const Eigen::VectorXd scale = config.equilibrate ? diag.cwiseMax(floor).cwiseSqrt().cwiseInverse().eval()
                                                   : Eigen::VectorXd::Ones(diag.size()).eval();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * reduced * scale.asDiagonal();

  NewtonDirection dir;
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) {
    const Eigen::Index v = scaled.rows();
    for (double tau = config.shift_start;; tau *= 10.0) {
      if (tau > config.shift_max) throw SolverError("reduced Newton system singular after maximal regularization");
      llt.compute(scaled + tau * Eigen::MatrixXd::Identity(v, v));
      if (llt.info() == Eigen::Success) {
        dir.shift = tau;
        break;
      }
    }
  }
  dir.d_eta = scale.asDiagonal() * llt.solve(scale.asDiagonal() * rhs);
  dir.d_s = m * dir.d_eta - r_primal;
  dir.d_lambda = ((-r_comp.array() - state.lambda.array() * dir.d_s.array()) / state.s.array()).matrix();
  return dir;
}

std::optional<double> step_length(const SolverState& state, const NewtonDirection& direction,
                                  const SolverConfig& config,
                                  const Admissible& admissible) {
  const double mu = state.mu();
  const auto w = static_cast<double>(state.lambda.size());
  double alpha = 1.0;
  for (int trial = 0; trial < config.max_backtracks; ++trial, alpha *= config.epsilon) {
    const Eigen::ArrayXd lam = state.lambda.array() + alpha * direction.d_lambda.array();
    const Eigen::ArrayXd s = state.s.array() + alpha * direction.d_s.array();
    double mu_new = 0.0;
    if (w > 0) {
      if ((lam <= 0.0).any() || (s <= 0.0).any()) continue;
      const Eigen::ArrayXd prod = lam * s;
      mu_new = prod.sum() / w;
      if ((prod < config.zeta * mu_new).any()) continue;
      if (mu_new > (1.0 - 0.01 * alpha) * mu) continue;
    }
    if (admissible && !admissible(state.eta + alpha * direction.d_eta, lam.matrix(), mu_new)) continue;
    return alpha;
  }
  return std::nullopt;
}

FitResult solve(const Model& model, const ConstraintMatrix& constraints, double omega, const SolverConfig& config,
                const SolverState& start) {
  config.validate();
  if (omega < 0.0) throw std::invalid_argument("smoothing value must be nonnegative");
  const SparseRowMatrix& m = constraints.matrix();
  if (start.s.size() != m.rows() || start.lambda.size() != m.rows() || start.eta.size() != m.cols())
    throw std::invalid_argument("solver start has wrong dimensions");
  if (m.rows() > 0 && ((start.s.array() <= 0.0).any() || (start.lambda.array() <= 0.0).any()))
    throw SolverError("infeasible start: slacks and multipliers must be strictly positive");

  SolverState state = start;
  FitResult result;
  result.omega = omega;

  Evaluation eval;
  if (auto failure = model.try_evaluate(state.eta, omega, Order::Hessian, eval))
    throw SolverError("infeasible start: log-likelihood undefined at subject " + std::to_string(failure->subject));

  // the trial point must keep ℓ defined and stay in the residual part of the
  // neighbourhood: ‖∇Φ + Mᵀλ‖∞ / μ ≤ β ‖r⁰‖∞ / μ⁰, unless already stationary
  const double mu0 = state.mu();
  const double r0 = (eval.gradient + m.transpose() * state.lambda).lpNorm<Eigen::Infinity>();
  const double residual_ratio = mu0 > 0.0 ? config.beta * std::max(r0, 1e-300) / mu0 : kInf;
  auto admissible = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda, double mu_new) {
    Evaluation probe;
    if (model.try_evaluate(eta, omega, Order::Gradient, probe) || !std::isfinite(probe.value)) return false;
    if (m.rows() == 0) return true;
    const double dual = (probe.gradient + m.transpose() * lambda).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + probe.gradient.lpNorm<Eigen::Infinity>();
    return dual < config.kkt_tol * scale || dual <= residual_ratio * mu_new;
  };

  auto record = [&](SolverStatus status, std::string message) {
    result.status = status;
    result.message = std::move(message);
    result.iterations = state.iteration;
    result.eta = ParamVector(model.layout(), state.eta);
    result.lambda = state.lambda;
    result.slack = state.s;
    result.mu = state.mu();
    result.gradient_norm = eval.gradient.lpNorm<Eigen::Infinity>();
    result.dual_residual = (eval.gradient + m.transpose() * state.lambda).lpNorm<Eigen::Infinity>();
    result.primal_residual = m.rows() ? (state.s - m * state.eta).lpNorm<Eigen::Infinity>() : 0.0;
    result.objective = eval.value;
    result.loglik = eval.value + omega * model.roughness(state.eta.head(model.layout().m));
    return result;
  };

  for (;; ++state.iteration) {
    const double mu = state.mu();
    const double dual = (eval.gradient + m.transpose() * state.lambda).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + eval.gradient.lpNorm<Eigen::Infinity>();
    if (mu < config.mu_tol && dual < config.kkt_tol * scale) return record(SolverStatus::Converged, "");
    if (state.iteration >= config.max_iter) return record(SolverStatus::MaxIterations, "iteration limit reached");

    NewtonDirection dir;
    try {
      dir = newton_direction(state, eval.gradient, eval.hessian, m, config.xi, config);
    } catch (const SolverError& e) {
      return record(SolverStatus::SingularSystem, e.what());
    }
    result.max_shift = std::max(result.max_shift, dir.shift);

    const auto alpha = step_length(state, dir, config, admissible);
    if (!alpha) return record(SolverStatus::LineSearchFailure, "no admissible step length");

    state.eta += *alpha * dir.d_eta;
    state.lambda += *alpha * dir.d_lambda;
    state.s += *alpha * dir.d_s;
    if (auto failure = model.try_evaluate(state.eta, omega, Order::Hessian, eval))
      throw std::logic_error("accepted step left the likelihood domain");
  }
}

FitResult solve(const Model& model, const Dataset& data, const ConstraintMatrix& constraints, double omega,
                const SolverConfig& config) {
  return solve(model, constraints, omega, config, initialize(data, model.layout(), constraints));
}

FitResult solve_best(const Model& model, const ConstraintMatrix& constraints, double omega, const SolverConfig& config,
                     const std::vector<SolverState>& starts) {
  if (starts.empty()) throw std::invalid_argument("solve_best needs at least one start");
  std::optional<FitResult> best, first;
  for (const SolverState& start : starts) {
    FitResult fit = solve(model, constraints, omega, config, start);
    if (fit.converged() && (!best || fit.objective > best->objective)) best = fit;
    if (!first) first = std::move(fit);
  }
  return best ? std::move(*best) : std::move(*first);
}

}  // namespace mixcure
