#pragma once

#include "mixcure/baseline.hpp"
#include "mixcure/constraints.hpp"
#include "mixcure/ip_solver.hpp"
#include "mixcure/model.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace mixcure {

struct CovarianceResult {
  Eigen::MatrixXd v;
  /// Stored constraint rows judged active.
  std::vector<Eigen::Index> active_rows;
  Eigen::Index u_dim = 0;
  bool ok = false;
  std::string diagnostic;

  Eigen::VectorXd standard_errors() const;
};

/// Row b is active when its slack is below tol·(1 + |M_b|·|η̂|) and its
/// multiplier exceeds its slack.
std::vector<Eigen::Index> active_set(const FitResult& fit, const ConstraintMatrix& constraints,
                                     double tol_active = 1e-6);

/// Orthonormal basis of {u : M_A u = 0} from a column-pivoted QR of M_Aᵀ.
/// A full-column-rank M_A yields a v × 0 basis.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& m_active);

/// V = U (Uᵀ C U)⁻¹ Uᵀ for the positive curvature C = −∇²Φ(η̂).
CovarianceResult covariance(const Eigen::MatrixXd& neg_hessian, const Eigen::MatrixXd& u);

/// Active set, null space, and V at a converged fit.
CovarianceResult covariance(const Model& model, const FitResult& fit, const ConstraintMatrix& constraints,
                            double tol_active = 1e-6);

struct CovariateNames {
  std::vector<std::string> z, w, x;
};

CovariateNames default_names(const ParamLayout& layout);

struct CoefficientRow {
  std::string name;
  Eigen::Index index = 0;  // position in η
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// exp(·) for incidence rows, identity for latency rows.
  double effect = 0.0;
  double effect_lower = 0.0;
  double effect_upper = 0.0;
  std::optional<double> p_one_sided;
  std::optional<double> p_two_sided;
  bool boundary = false;
};

struct BaselineRow {
  Eigen::Index bin = 0;
  double start = 0.0, end = 0.0, midpoint = 0.0;
  double hazard = 0.0, se = 0.0, lower = 0.0, upper = 0.0;
};

struct FitSummary {
  std::vector<CoefficientRow> incidence;  // OR
  std::vector<CoefficientRow> latency;    // HD (β then α)
  std::vector<BaselineRow> baseline;
};

double normal_cdf(double x);

/// Wald summaries: estimate ± 1.96 SE, one- and two-sided normal p-values for
/// a zero coefficient. Coordinates with zero SE are marked boundary and get
/// no p-value.
FitSummary summarize(const BinGrid& grid, const FitResult& fit, const CovarianceResult& cov,
                     const CovariateNames& names);

/// Text table with an OR block and an HD block.
std::string format_summary(const FitSummary& summary);

struct CovariateProfile {
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  /// Piecewise schedule; empty means x constant at `x_const`.
  std::vector<double> tv_times;
  Eigen::MatrixXd tv_values;
  Eigen::VectorXd x_const;
};

struct SurvivalPoint {
  double t = 0.0, survival = 1.0, se = 0.0, lower = 1.0, upper = 1.0;
};

/// S̃(t) = π S(t) + 1 − π at η̂ with delta-method pointwise 95% bands, clipped
/// to [0, 1]. Times beyond e_m·(1 + extrapolation_cap) are refused.
std::vector<SurvivalPoint> predict_survival(const BinGrid& grid, const ParamVector& eta, const Eigen::MatrixXd& v,
                                            const CovariateProfile& profile, const std::vector<double>& times,
                                            double extrapolation_cap = 0.0);

/// ∂S̃(t)/∂η at η̂.
Eigen::VectorXd mixture_survival_gradient(const BinGrid& grid, const ParamVector& eta, const Subject& subject,
                                          double t);

Subject profile_subject(const CovariateProfile& profile, double horizon);

/// Smallest latency hazard of the profile on [0, horizon]. The fit only
/// constrains the hazards of observed subjects, so a new profile can have a
/// negative hazard and a curve that rises above 1 there.
double min_profile_hazard(const BinGrid& grid, const ParamVector& eta, const CovariateProfile& profile,
                          double horizon);

}  // namespace mixcure
