#include "mixcure/model.hpp"

#include <cmath>

namespace mixcure {

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double log_logistic(double u) {
  if (u >= 0.0) return -std::log1p(std::exp(-u));
  return u - std::log1p(std::exp(u));
}

double incidence_prob(const Eigen::Ref<const Eigen::VectorXd>& gamma, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (gamma.size() != z.size()) throw std::invalid_argument("incidence_prob: dimension mismatch");
  return logistic(z.dot(gamma));
}

Eigen::VectorXd hazard_row(const BinGrid& grid, const Subject& subject, double t) {
  const Eigen::Index m = grid.m(), p = subject.tv_values.cols(), r = subject.w.size();
  Eigen::VectorXd row(m + p + r);
  row.head(m) = basis_at(grid, t);
  if (p > 0) row.segment(m, p) = subject.x_at(t);
  row.tail(r) = subject.w;
  return row;
}

Eigen::VectorXd cum_hazard_row(const BinGrid& grid, const Subject& subject, double t) {
  const Eigen::Index m = grid.m(), p = subject.tv_values.cols(), r = subject.w.size();
  Eigen::VectorXd row(m + p + r);
  row.head(m) = basis_integral_at(grid, t);
  if (p > 0) row.segment(m, p) = subject.x_integral(t);
  row.tail(r) = subject.w * t;
  return row;
}

double hazard(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t) {
  return hazard_row(grid, subject, t).dot(eta.latency());
}

double cum_hazard(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t) {
  return cum_hazard_row(grid, subject, t).dot(eta.latency());
}

double survival(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t) {
  return std::exp(-cum_hazard(eta, subject, grid, t));
}

double mixture_survival(const ParamVector& eta, const Subject& subject, const BinGrid& grid, double t) {
  const double pi = incidence_prob(eta.gamma(), subject.z);
  return pi * survival(eta, subject, grid, t) + (1.0 - pi);
}

Model::Model(const Dataset& data, BinGrid grid)
    : layout_{grid.m(), data.p, data.r, data.q},
      grid_(std::move(grid)),
      penalty_(penalty_matrix(grid_.m())) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index vl = layout_.latency_size();
  forms_.setZero(n, vl);
  linear_.setZero(n, vl);
  z_.setZero(n, layout_.q);
  kinds_.reserve(data.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Subject& s = data.subjects[static_cast<std::size_t>(i)];
    kinds_.push_back(s.kind);
    z_.row(i) = s.z.transpose();
    switch (s.kind) {
      case CensoringKind::Event:
        forms_.row(i) = hazard_row(grid_, s, s.t_left).transpose();
        linear_.row(i) = cum_hazard_row(grid_, s, s.t_left).transpose();
        break;
      case CensoringKind::Right:
        forms_.row(i) = cum_hazard_row(grid_, s, s.t_left).transpose();
        break;
      case CensoringKind::Left:
        forms_.row(i) = cum_hazard_row(grid_, s, s.t_right).transpose();
        break;
      case CensoringKind::Interval: {
        const Eigen::VectorXd lo = cum_hazard_row(grid_, s, s.t_left);
        forms_.row(i) = (cum_hazard_row(grid_, s, s.t_right) - lo).transpose();
        linear_.row(i) = lo.transpose();
        break;
      }
    }
  }
  linear_sum_ = linear_.colwise().sum().transpose();
}

namespace {

// Contribution of one subject as a function of its form value f and its
// incidence predictor u. Second derivatives are only filled for Hessian order.
struct TermDerivs {
  double value = 0.0;
  double d_f = 0.0, d_u = 0.0;
  double d_ff = 0.0, d_uu = 0.0, d_fu = 0.0;
};

// log(1 − e^{−x}) and its derivatives for x > 0.
inline void log_one_minus_exp(double x, TermDerivs& t) {
  const double em1 = std::expm1(x);  // e^x − 1
  t.value += std::log(-std::expm1(-x));
  const double g = 1.0 / em1;
  t.d_f += g;
  t.d_ff += -g * (1.0 + g);
}

inline void add_log_pi(double u, TermDerivs& t) {
  const double pi = logistic(u);
  t.value += log_logistic(u);
  t.d_u += 1.0 - pi;
  t.d_uu += -pi * (1.0 - pi);
}

bool subject_term(CensoringKind kind, double f, double u, TermDerivs& t, const char*& term) {
  switch (kind) {
    case CensoringKind::Event:
      term = "event";
      if (!(f > 0.0)) return false;
      t.value = std::log(f);
      t.d_f = 1.0 / f;
      t.d_ff = -1.0 / (f * f);
      add_log_pi(u, t);
      return true;
    case CensoringKind::Left:
      term = "left";
      if (!(f > 0.0)) return false;
      log_one_minus_exp(f, t);
      add_log_pi(u, t);
      return std::isfinite(t.value);
    case CensoringKind::Interval:
      term = "interval";
      if (!(f > 0.0)) return false;
      log_one_minus_exp(f, t);
      add_log_pi(u, t);
      return std::isfinite(t.value);
    case CensoringKind::Right: {
      term = "right";
      const double pi = logistic(u), one_minus_pi = logistic(-u);
      const double surv = std::exp(-f);
      const double g = one_minus_pi + pi * surv;
      if (!(g > 0.0) || !std::isfinite(g)) return false;
      const double dpi = pi * one_minus_pi;
      const double rho = pi * surv / g;
      const double fu = dpi * (surv - 1.0) / g;
      t.value = std::log(g);
      t.d_f = -rho;
      t.d_u = fu;
      t.d_ff = rho * (1.0 - rho);
      t.d_uu = dpi * (1.0 - 2.0 * pi) * (surv - 1.0) / g - fu * fu;
      t.d_fu = -dpi * surv / g + rho * fu;
      return std::isfinite(t.value);
    }
  }
  return false;
}

}  // namespace

std::optional<DomainFailure> Model::try_evaluate(const Eigen::VectorXd& eta, double omega, Order order,
                                                 Evaluation& out) const {
  if (eta.size() != layout_.size()) throw std::invalid_argument("Model: parameter length mismatch");
  const Eigen::Index n = forms_.rows();
  const auto latency = eta.head(layout_.latency_size());
  const auto theta = eta.head(layout_.m);
  const Eigen::VectorXd f = forms_ * latency;
  const Eigen::VectorXd u = z_ * eta.tail(layout_.q);

  Eigen::VectorXd d_f, d_u, d_ff, d_uu, d_fu;
  const bool grad = order != Order::Value, hess = order == Order::Hessian;
  if (grad) {
    d_f.resize(n);
    d_u.resize(n);
  }
  if (hess) {
    d_ff.resize(n);
    d_uu.resize(n);
    d_fu.resize(n);
  }

  double value = -linear_sum_.dot(latency);
  for (Eigen::Index i = 0; i < n; ++i) {
    TermDerivs t;
    const char* term = "";
    if (!subject_term(kinds_[static_cast<std::size_t>(i)], f(i), u(i), t, term))
      return DomainFailure{static_cast<std::size_t>(i), term};
    value += t.value;
    if (grad) {
      d_f(i) = t.d_f;
      d_u(i) = t.d_u;
    }
    if (hess) {
      d_ff(i) = t.d_ff;
      d_uu(i) = t.d_uu;
      d_fu(i) = t.d_fu;
    }
  }
  const Eigen::VectorXd r_theta = penalty_ * theta;
  out.value = value - omega * theta.dot(r_theta);

  const Eigen::Index vl = layout_.latency_size(), q = layout_.q, m = layout_.m;
  if (grad) {
    out.gradient.resize(layout_.size());
    out.gradient.head(vl) = forms_.transpose() * d_f - linear_sum_;
    out.gradient.tail(q) = z_.transpose() * d_u;
    out.gradient.head(m) -= 2.0 * omega * r_theta;
  }
  if (hess) {
    out.hessian.resize(layout_.size(), layout_.size());
    out.hessian.topLeftCorner(vl, vl).noalias() = forms_.transpose() * (d_ff.asDiagonal() * forms_);
    out.hessian.bottomRightCorner(q, q).noalias() = z_.transpose() * (d_uu.asDiagonal() * z_);
    out.hessian.topRightCorner(vl, q).noalias() = forms_.transpose() * (d_fu.asDiagonal() * z_);
    out.hessian.bottomLeftCorner(q, vl) = out.hessian.topRightCorner(vl, q).transpose();
    out.hessian.topLeftCorner(m, m) -= 2.0 * omega * penalty_;
    // exact symmetry; the blocked products above differ by rounding
    out.hessian.triangularView<Eigen::StrictlyLower>() = out.hessian.transpose();
  }
  return std::nullopt;
}

Evaluation Model::evaluate_or_throw(const Eigen::VectorXd& eta, double omega, Order order) const {
  Evaluation out;
  if (auto failure = try_evaluate(eta, omega, order, out)) throw DomainError(failure->subject, failure->term);
  return out;
}

double Model::log_likelihood(const ParamVector& eta) const {
  return evaluate_or_throw(eta.values(), 0.0, Order::Value).value;
}

double Model::penalized_loglik(const ParamVector& eta, double omega) const {
  return evaluate_or_throw(eta.values(), omega, Order::Value).value;
}

Eigen::VectorXd Model::gradient(const ParamVector& eta, double omega) const {
  return evaluate_or_throw(eta.values(), omega, Order::Gradient).gradient;
}

Eigen::MatrixXd Model::hessian(const ParamVector& eta, double omega) const {
  return evaluate_or_throw(eta.values(), omega, Order::Hessian).hessian;
}

}  // namespace mixcure
