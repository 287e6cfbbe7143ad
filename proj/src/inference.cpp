#include "mixcure/inference.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mixcure {

namespace {
constexpr double kZ975 = 1.96;
}

Eigen::VectorXd CovarianceResult::standard_errors() const {
  return v.diagonal().array().max(0.0).sqrt().matrix();
}

std::vector<Eigen::Index> active_set(const FitResult& fit, const ConstraintMatrix& constraints, double tol_active) {
  std::vector<Eigen::Index> active;
  const SparseRowMatrix& m = constraints.matrix();
  const Eigen::VectorXd abs_eta = fit.eta.values().cwiseAbs();
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    double scale = 0.0;
    for (SparseRowMatrix::InnerIterator it(m, b); it; ++it) scale += std::abs(it.value()) * abs_eta(it.col());
    const double slack = m.row(b).dot(fit.eta.values());
    if (slack < tol_active * (1.0 + scale) && fit.lambda(b) > fit.slack(b)) active.push_back(b);
  }
  return active;
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m_active) {
  const Eigen::Index r = m_active.rows(), v = m_active.cols();
  if (r == 0) return Eigen::MatrixXd::Identity(v, v);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m_active.transpose());
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(v, v);
  return q.rightCols(v - rank);
}

CovarianceResult covariance(const Eigen::MatrixXd& neg_hessian, const Eigen::MatrixXd& u) {
  CovarianceResult out;
  out.u_dim = u.cols();
  const Eigen::MatrixXd inner = u.transpose() * neg_hessian * u;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()));
  const Eigen::VectorXd values = eig.eigenvalues();
  const double top = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  if (values.size() && !(values(0) > 1e-12 * top)) {
    Eigen::Index worst = 0;
    const Eigen::VectorXd direction = u * eig.eigenvectors().col(0);
    direction.cwiseAbs().maxCoeff(&worst);
    std::ostringstream msg;
    msg << "projected curvature not positive definite: eigenvalue " << values(0)
        << " along a direction dominated by parameter " << worst;
    out.diagnostic = msg.str();
    out.v = Eigen::MatrixXd::Constant(u.rows(), u.rows(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const Eigen::MatrixXd inv = eig.eigenvectors() * values.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  out.v = u * inv * u.transpose();
  out.v = 0.5 * (out.v + out.v.transpose()).eval();
  out.ok = true;
  return out;
}

CovarianceResult covariance(const Model& model, const FitResult& fit, const ConstraintMatrix& constraints,
                            double tol_active) {
  const auto active = active_set(fit, constraints, tol_active);
  const Eigen::MatrixXd dense(constraints.matrix());
  Eigen::MatrixXd m_active(static_cast<Eigen::Index>(active.size()), dense.cols());
  for (std::size_t k = 0; k < active.size(); ++k) m_active.row(static_cast<Eigen::Index>(k)) = dense.row(active[k]);
  const Eigen::MatrixXd u = null_space_basis(m_active);
  CovarianceResult out = covariance(-model.hessian(fit.eta, fit.omega), u);
  out.active_rows = active;
  return out;
}

CovariateNames default_names(const ParamLayout& layout) {
  CovariateNames names;
  for (Eigen::Index j = 0; j < layout.q; ++j) names.z.push_back("z_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < layout.r; ++j) names.w.push_back("w_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < layout.p; ++j) names.x.push_back("x_" + std::to_string(j + 1));
  return names;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

CoefficientRow coefficient(const std::string& name, Eigen::Index idx, double est, double var, bool exponentiate) {
  CoefficientRow row;
  row.name = name;
  row.index = idx;
  row.estimate = est;
  row.se = std::sqrt(std::max(var, 0.0));
  row.lower = est - kZ975 * row.se;
  row.upper = est + kZ975 * row.se;
  row.boundary = !(row.se > 1e-10);
  if (!row.boundary) {
    const double z = std::abs(est / row.se);
    row.p_one_sided = normal_cdf(-z);
    row.p_two_sided = 2.0 * normal_cdf(-z);
  }
  auto f = [exponentiate](double x) { return exponentiate ? std::exp(x) : x; };
  row.effect = f(est);
  row.effect_lower = f(row.lower);
  row.effect_upper = f(row.upper);
  return row;
}

}  // namespace

FitSummary summarize(const BinGrid& grid, const FitResult& fit, const CovarianceResult& cov,
                     const CovariateNames& names) {
  const ParamLayout& lay = fit.eta.layout();
  const Eigen::VectorXd& eta = fit.eta.values();
  auto name_or = [](const std::vector<std::string>& v, Eigen::Index j, const char* prefix) {
    return static_cast<std::size_t>(j) < v.size() ? v[static_cast<std::size_t>(j)]
                                                  : std::string(prefix) + std::to_string(j + 1);
  };
  FitSummary out;
  for (Eigen::Index j = 0; j < lay.q; ++j) {
    const Eigen::Index k = lay.gamma_offset() + j;
    out.incidence.push_back(coefficient(name_or(names.z, j, "z_"), k, eta(k), cov.v(k, k), true));
  }
  for (Eigen::Index j = 0; j < lay.p; ++j) {
    const Eigen::Index k = lay.beta_offset() + j;
    out.latency.push_back(coefficient(name_or(names.x, j, "x_"), k, eta(k), cov.v(k, k), false));
  }
  for (Eigen::Index j = 0; j < lay.r; ++j) {
    const Eigen::Index k = lay.alpha_offset() + j;
    out.latency.push_back(coefficient(name_or(names.w, j, "w_"), k, eta(k), cov.v(k, k), false));
  }
  for (Eigen::Index u = 0; u < lay.m; ++u) {
    BaselineRow row;
    row.bin = u;
    row.start = grid.edges()[static_cast<std::size_t>(u)];
    row.end = grid.edges()[static_cast<std::size_t>(u + 1)];
    row.midpoint = grid.midpoint(u);
    row.hazard = eta(u);
    row.se = std::sqrt(std::max(cov.v(u, u), 0.0));
    row.lower = row.hazard - kZ975 * row.se;
    row.upper = row.hazard + kZ975 * row.se;
    out.baseline.push_back(row);
  }
  return out;
}

std::string format_summary(const FitSummary& summary) {
  std::ostringstream os;
  char line[256];
  auto pval = [](const std::optional<double>& p) {
    char buf[32];
    if (!p) return std::string("boundary");
    if (*p < 0.0005) return std::string("<0.001");
    std::snprintf(buf, sizeof buf, "%.3f", *p);
    return std::string(buf);
  };
  auto block = [&](const char* title, const char* effect, const std::vector<CoefficientRow>& rows) {
    std::snprintf(line, sizeof line, "%-28s %10s %10s %10s %22s\n", title, effect, "p(1-sided)", "p(2-sided)",
                  "95% CI");
    os << line;
    for (const auto& r : rows) {
      char ci[64];
      std::snprintf(ci, sizeof ci, "(%.3f, %.3f)", r.effect_lower, r.effect_upper);
      std::snprintf(line, sizeof line, "%-28s %10.3f %10s %10s %22s\n", r.name.c_str(), r.effect,
                    pval(r.p_one_sided).c_str(), pval(r.p_two_sided).c_str(), ci);
      os << line;
    }
  };
  block("Incidence model", "OR", summary.incidence);
  os << '\n';
  block("Latency model", "HD", summary.latency);
  return os.str();
}

Subject profile_subject(const CovariateProfile& profile, double horizon) {
  Subject s;
  s.z = profile.z;
  s.w = profile.w;
  s.t_left = horizon;
  s.t_right = kInf;
  if (profile.tv_times.empty()) {
    s.tv_times = {horizon};
    s.tv_values = profile.x_const.transpose();
  } else {
    s.tv_times = profile.tv_times;
    s.tv_values = profile.tv_values;
  }
  return s;
}

double min_profile_hazard(const BinGrid& grid, const ParamVector& eta, const CovariateProfile& profile,
                          double horizon) {
  const Subject s = profile_subject(profile, horizon);
  // h is constant between consecutive bin edges and piece ends
  std::vector<double> cuts(grid.edges().begin(), grid.edges().end());
  cuts.insert(cuts.end(), s.tv_times.begin(), s.tv_times.end());
  cuts.push_back(horizon);
  std::sort(cuts.begin(), cuts.end());
  double low = kInf;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k] >= horizon) break;
    if (cuts[k + 1] <= cuts[k]) continue;
    low = std::min(low, hazard(eta, s, grid, 0.5 * (cuts[k] + std::min(cuts[k + 1], horizon))));
  }
  return low;
}

Eigen::VectorXd mixture_survival_gradient(const BinGrid& grid, const ParamVector& eta, const Subject& subject,
                                          double t) {
  const ParamLayout& lay = eta.layout();
  const double pi = incidence_prob(eta.gamma(), subject.z);
  const double surv = survival(eta, subject, grid, t);
  Eigen::VectorXd g(lay.size());
  g.head(lay.latency_size()) = -pi * surv * cum_hazard_row(grid, subject, t);
  g.tail(lay.q) = pi * (1.0 - pi) * (surv - 1.0) * subject.z;
  return g;
}

std::vector<SurvivalPoint> predict_survival(const BinGrid& grid, const ParamVector& eta, const Eigen::MatrixXd& v,
                                            const CovariateProfile& profile, const std::vector<double>& times,
                                            double extrapolation_cap) {
  const ParamLayout& lay = eta.layout();
  if (profile.z.size() != lay.q || profile.w.size() != lay.r)
    throw InputError("prediction profile has wrong covariate dimensions");
  const Eigen::Index p = profile.tv_times.empty() ? profile.x_const.size() : profile.tv_values.cols();
  if (p != lay.p) throw InputError("prediction profile has wrong time-varying covariate dimension");
  if (!profile.tv_times.empty() && static_cast<std::size_t>(profile.tv_values.rows()) != profile.tv_times.size())
    throw InputError("prediction schedule has mismatched lengths");
  if (v.rows() != lay.size() || v.cols() != lay.size()) throw std::invalid_argument("covariance has wrong shape");

  const double limit = grid.upper() * (1.0 + extrapolation_cap);
  for (double t : times)
    if (!(t >= 0.0 && t <= limit)) throw InputError("prediction time outside [0, " + std::to_string(limit) + "]");

  const Subject subject = profile_subject(profile, grid.upper());
  std::vector<SurvivalPoint> out;
  out.reserve(times.size());
  for (double t : times) {
    SurvivalPoint pt;
    pt.t = t;
    pt.survival = mixture_survival(eta, subject, grid, t);
    const Eigen::VectorXd g = mixture_survival_gradient(grid, eta, subject, t);
    pt.se = std::sqrt(std::max(g.dot(v * g), 0.0));
    pt.lower = std::clamp(pt.survival - kZ975 * pt.se, 0.0, 1.0);
    pt.upper = std::clamp(pt.survival + kZ975 * pt.se, 0.0, 1.0);
    out.push_back(pt);
  }
  return out;
}

}  // namespace mixcure
