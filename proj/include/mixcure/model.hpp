#pragma once

#include "mixcure/baseline.hpp"
#include "mixcure/core_types.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixcure {

/// A log-likelihood term whose log argument is not strictly positive.
class DomainError : public std::domain_error {
 public:
  DomainError(std::size_t subject, std::string term)
      : std::domain_error("log-likelihood domain violation at subject " + std::to_string(subject) +
                          " (" + term + " term)"),
        subject_(subject),
        term_(std::move(term)) {}
  std::size_t subject() const { return subject_; }
  const std::string& term() const { return term_; }

 private:
  std::size_t subject_;
  std::string term_;
};

/// Logistic incidence probability π(z) = exp(zᵀγ)/(1 + exp(zᵀγ)).
double incidence_prob(const Eigen::Ref<const Eigen::VectorXd>& gamma, const Eigen::Ref<const Eigen::VectorXd>& z);
double logistic(double u);
double log_logistic(double u);

/// Row b(t) with h_i(t) = b(t)ᵀ(θ, β, α): (ψ(t), x_i(t), w_i).
Eigen::VectorXd hazard_row(const BinGrid& grid, const Subject& subject, double t);
/// Row a(t) with H_i(t) = a(t)ᵀ(θ, β, α): (Ψ(t), X_i(t), w_i·t).
Eigen::VectorXd cum_hazard_row(const BinGrid& grid, const Subject& subject, double t);

double hazard(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t);
double cum_hazard(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t);
double survival(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t);
/// π·S_i(t) + 1 − π.
double mixture_survival(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t);

enum class Order { Value, Gradient, Hessian };

struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

struct DomainFailure {
  std::size_t subject = 0;
  const char* term = "";
};

/// Parameter-independent precomputation for one dataset on one bin grid.
///
/// Every subject's log-likelihood depends on the latency block through one
/// nonlinear linear form and one purely linear term:
///   event:    log h(t) − H(t)          form b(t),          linear a(t)
///   right:    log(1 − π + π e^{−H(tL)}) form a(tL)
///   left:     log(1 − e^{−H(tR)})      form a(tR)
///   interval: log(1 − e^{−D}) − H(tL) form a(tR) − a(tL), linear a(tL)
/// plus log π for every non-right-censored subject. The Hessian is then
/// three weighted Gram products.
class Model {
 public:
  Model(const Dataset& data, BinGrid grid);

  const ParamLayout& layout() const { return layout_; }
  const BinGrid& grid() const { return grid_; }
  /// Roughness penalty R (m × m).
  const Eigen::MatrixXd& penalty() const { return penalty_; }
  std::size_t n_subjects() const { return kinds_.size(); }

  /// Evaluates Φ = ℓ − ω θᵀRθ and, depending on `order`, its gradient and
  /// Hessian. Returns the first failing term instead of throwing.
  std::optional<DomainFailure> try_evaluate(const Eigen::VectorXd& eta, double omega, Order order,
                                            Evaluation& out) const;

  double log_likelihood(const ParamVector& eta) const;
  double penalized_loglik(const ParamVector& eta, double omega) const;
  Eigen::VectorXd gradient(const ParamVector& eta, double omega) const;
  Eigen::MatrixXd hessian(const ParamVector& eta, double omega) const;

  double roughness(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
    return theta.dot(penalty_ * theta);
  }

 private:
  Evaluation evaluate_or_throw(const Eigen::VectorXd& eta, double omega, Order order) const;

  ParamLayout layout_;
  BinGrid grid_;
  Eigen::MatrixXd penalty_;
  std::vector<CensoringKind> kinds_;
  Eigen::MatrixXd forms_;   // n × (m+p+r)
  Eigen::MatrixXd linear_;  // n × (m+p+r)
  Eigen::VectorXd linear_sum_;
  Eigen::MatrixXd z_;  // n × q
};

}  // namespace mixcure
