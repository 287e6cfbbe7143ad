#pragma once

#include "mixcure/core_types.hpp"
#include "mixcure/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace mixcure::testing {

/// Raw record with constant covariates.
inline RawRecord record(double tl, double tr, Eigen::VectorXd z, Eigen::VectorXd w, Eigen::VectorXd x = {}) {
  RawRecord r;
  r.t_left = tl;
  r.t_right = tr;
  r.z = std::move(z);
  r.w = std::move(w);
  r.x_const = std::move(x);
  return r;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

/// Mixture-cure sample: one incidence covariate z ~ U(0.5, 1.5) with
/// P(susceptible) = 1/(1 + e^{−1.5z}) and one baseline covariate w ~ U(0, 1).
/// Susceptible subjects have exact exponential(`rate`) events, except that
/// every fourth is right-censored at half its event time. Cured subjects are
/// right-censored at U(3, 6)/rate, past most events.
inline Dataset exponential_dataset(std::size_t n, double rate, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(rate);
  std::vector<RawRecord> raw;
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = 0.5 + unif(gen);
    const Eigen::VectorXd z = vec({z1});
    const Eigen::VectorXd w = vec({unif(gen)});
    const bool susceptible = unif(gen) < 1.0 / (1.0 + std::exp(-1.5 * z1));
    const double t = expo(gen);
    if (!susceptible)
      raw.push_back(record((3.0 + 3.0 * unif(gen)) / rate, kInf, z, w));
    else if (i % 4 == 3)
      raw.push_back(record(0.5 * t, kInf, z, w));
    else
      raw.push_back(record(t, t, z, w));
  }
  return validate_dataset(raw);
}

/// Central differences of the value (gradient check) or of the analytic
/// gradient (Hessian check); returns the largest componentwise error
/// relative to 1 + |analytic|.
inline double gradient_fd_error(const Model& model, const ParamVector& eta, double omega, double h = 1e-6) {
  const Eigen::VectorXd g = model.gradient(eta, omega);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    ParamVector a = eta, b = eta;
    a.values()(k) += h;
    b.values()(k) -= h;
    const double fd = (model.penalized_loglik(a, omega) - model.penalized_loglik(b, omega)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(k)) / (1.0 + std::abs(g(k))));
  }
  return worst;
}

inline double hessian_fd_error(const Model& model, const ParamVector& eta, double omega, double h = 1e-6) {
  const Eigen::MatrixXd hess = model.hessian(eta, omega);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    ParamVector a = eta, b = eta;
    a.values()(k) += h;
    b.values()(k) -= h;
    const Eigen::VectorXd fd = (model.gradient(a, omega) - model.gradient(b, omega)) / (2.0 * h);
    const Eigen::ArrayXd err = (fd - hess.col(k)).cwiseAbs().array() / (1.0 + hess.col(k).cwiseAbs().array());
    worst = std::max(worst, err.maxCoeff());
  }
  return worst;
}

/// Damped Newton with Levenberg shift and Armijo backtracking on Φ, no
/// constraints.
inline Eigen::VectorXd newton_maximize(const Model& model, Eigen::VectorXd eta, double omega) {
  for (int it = 0; it < 200; ++it) {
    const ParamVector p(model.layout(), eta);
    const Eigen::VectorXd g = model.gradient(p, omega);
    if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;
    Eigen::MatrixXd a = -model.hessian(p, omega);
    Eigen::VectorXd d;
    for (double tau = 0.0;; tau = tau == 0.0 ? 1e-8 : tau * 10) {
      Eigen::LLT<Eigen::MatrixXd> llt(a + tau * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
      if (llt.info() == Eigen::Success) {
        d = llt.solve(g);
        break;
      }
    }
    const double f0 = model.penalized_loglik(p, omega);
    double step = 1.0;
    for (; step > 1e-12; step *= 0.5) {
      Evaluation out;
      const Eigen::VectorXd trial = eta + step * d;
      if (!model.try_evaluate(trial, omega, Order::Value, out) && out.value >= f0 + 1e-4 * step * g.dot(d)) break;
    }
    eta += step * d;
  }
  return eta;
}

/// Events at 0.2..0.9 and 2.1..2.9 so bin (1, 2] has exposure but no event.
inline Dataset empty_bin_dataset() {
  std::vector<RawRecord> raw;
  for (int k = 0; k < 8; ++k) {
    const double a = 0.2 + 0.1 * k, b = 2.1 + 0.1 * k;
    raw.push_back(record(a, a, vec({}), vec({})));
    raw.push_back(record(b, b, vec({}), vec({})));
  }
  return validate_dataset(raw);
}

}  // namespace mixcure::testing
