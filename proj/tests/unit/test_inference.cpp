#include "helpers.hpp"
#include "mixcure/baseline.hpp"
#include "mixcure/fit.hpp"
#include "mixcure/inference.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <random>

using namespace mixcure;
using namespace mixcure::testing;

TEST_CASE("null space of coordinate rows") {
  Eigen::MatrixXd ma(1, 3);
  ma << 1, 0, 0;
  const Eigen::MatrixXd u = null_space_basis(ma);
  REQUIRE(u.cols() == 2);
  CHECK(u.row(0).norm() < 1e-15);
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);

  const Eigen::MatrixXd full = null_space_basis(Eigen::MatrixXd(0, 4));
  CHECK(full.isApprox(Eigen::MatrixXd::Identity(4, 4)));
}

TEST_CASE("null space of a random 3 x 10 matrix") {
  std::srand(12);
  const Eigen::MatrixXd ma = Eigen::MatrixXd::Random(3, 10);
  const Eigen::MatrixXd u = null_space_basis(ma);
  CHECK(u.cols() == 7);
  CHECK((ma * u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-10);
  // rank-deficient rows: the duplicate adds nothing
  Eigen::MatrixXd dup(4, 10);
  dup << ma, ma.row(0);
  CHECK(null_space_basis(dup).cols() == 7);
}

TEST_CASE("covariance through the null space") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  const CovarianceResult plain = covariance(eye, eye);
  REQUIRE(plain.ok);
  CHECK(plain.v.isApprox(eye));

  Eigen::MatrixXd ma = Eigen::MatrixXd::Zero(1, 4);
  ma(0, 0) = 1.0;
  std::srand(2);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(4, 4);
  const Eigen::MatrixXd c = b * b.transpose() + Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd u = null_space_basis(ma);
  const CovarianceResult cov = covariance(c, u);
  REQUIRE(cov.ok);
  CHECK(cov.v.row(0).norm() < 1e-14);
  CHECK(cov.v.col(0).norm() < 1e-14);
  CHECK((ma * cov.v).norm() < 1e-12);
  CHECK((cov.v - cov.v.transpose()).norm() < 1e-12);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov.v).eigenvalues().minCoeff() > -1e-12);

  // any orthonormal basis of the same space gives the same V
  const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(3, 3)).householderQ();
  const CovarianceResult cov2 = covariance(c, u * rot);
  CHECK((cov.v - cov2.v).cwiseAbs().maxCoeff() < 1e-8);

  const CovarianceResult bad = covariance(-eye, eye);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.diagnostic.empty());
}

TEST_CASE("Wald summaries") {
  const BinGrid g({0.0, 1.0});
  FitResult fit;
  fit.eta = ParamVector(ParamLayout{1, 0, 1, 1});
  fit.eta.theta() << 0.7;
  fit.eta.alpha() << 0.0;
  fit.eta.gamma() << 0.0;
  CovarianceResult cov;
  cov.ok = true;
  cov.v = Eigen::MatrixXd::Zero(3, 3);
  cov.v(0, 0) = 0.01;
  cov.v(2, 2) = 1.0;  // γ SE 1, α SE 0
  const FitSummary s = summarize(g, fit, cov, default_names(fit.eta.layout()));
  REQUIRE(s.incidence.size() == 1);
  const CoefficientRow& or_row = s.incidence[0];
  CHECK(or_row.effect == 1.0);
  CHECK(or_row.effect_lower == doctest::Approx(std::exp(-1.96)));
  CHECK(or_row.effect_upper == doctest::Approx(std::exp(1.96)));
  CHECK(or_row.lower <= or_row.estimate);
  CHECK(or_row.upper >= or_row.estimate);
  REQUIRE(or_row.p_one_sided.has_value());
  CHECK(*or_row.p_one_sided == doctest::Approx(0.5));
  CHECK(*or_row.p_two_sided == doctest::Approx(1.0));
  REQUIRE(s.latency.size() == 1);
  CHECK(s.latency[0].boundary);
  CHECK_FALSE(s.latency[0].p_one_sided.has_value());
  REQUIRE(s.baseline.size() == 1);
  CHECK(s.baseline[0].se == doctest::Approx(0.1));
  CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  const std::string table = format_summary(s);
  CHECK(table.find("OR") != std::string::npos);
  CHECK(table.find("HD") != std::string::npos);
}

TEST_CASE("predicted mixture survival") {
  const Dataset d = exponential_dataset(150, 1.0, 13);
  FitOptions opt;
  opt.n_obs_per_bin = 15;
  opt.omega = 2.0;
  const FittedModel fm = fit_model(d, opt);
  REQUIRE(fm.fit.converged());
  REQUIRE(fm.covariance.ok);
  CovariateProfile prof{vec({0.6}), vec({0.4}), {}, {}, Eigen::VectorXd()};
  const double upper = fm.grid().upper();
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(upper * k / 20.0);
  const auto curve = predict_survival(fm.grid(), fm.fit.eta, fm.covariance.v, prof, times);
  CHECK(curve[0].survival == 1.0);
  CHECK(curve[0].lower == 1.0);
  CHECK(curve[0].upper == 1.0);
  const double pi = incidence_prob(fm.fit.eta.gamma(), prof.z);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    CHECK(curve[k].survival <= curve[k - 1].survival + 1e-15);
    CHECK(curve[k].survival >= 1.0 - pi - 1e-12);
    CHECK(curve[k].lower <= curve[k].survival);
    CHECK(curve[k].upper >= curve[k].survival);
    CHECK(curve[k].lower >= 0.0);
    CHECK(curve[k].upper <= 1.0);
  }
  CHECK_THROWS(predict_survival(fm.grid(), fm.fit.eta, fm.covariance.v, prof, {upper * 1.5}));
  CHECK_NOTHROW(predict_survival(fm.grid(), fm.fit.eta, fm.covariance.v, prof, {upper * 1.5}, 0.6));

  // analytic gradient against central differences
  const Subject subj = profile_subject(prof, upper);
  const double t = 0.4 * upper;
  const Eigen::VectorXd grad = mixture_survival_gradient(fm.grid(), fm.fit.eta, subj, t);
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    ParamVector a = fm.fit.eta, b = fm.fit.eta;
    a.values()(k) += 1e-6;
    b.values()(k) -= 1e-6;
    const double fd = (mixture_survival(a, subj, fm.grid(), t) - mixture_survival(b, subj, fm.grid(), t)) / 2e-6;
    CHECK(std::abs(fd - grad(k)) < 1e-7);
  }

  // delta method against a parametric bootstrap from N(η̂, V)
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fm.covariance.v);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal;
  const int draws = 500;
  std::vector<double> values;
  for (int k = 0; k < draws; ++k) {
    Eigen::VectorXd e(root.cols());
    for (Eigen::Index j = 0; j < e.size(); ++j) e(j) = normal(gen);
    const ParamVector draw(fm.fit.eta.layout(), fm.fit.eta.values() + root * e);
    values.push_back(mixture_survival(draw, subj, fm.grid(), t));
  }
  double mean = 0.0, var = 0.0;
  for (double v : values) mean += v / draws;
  for (double v : values) var += (v - mean) * (v - mean) / (draws - 1);
  const auto at = predict_survival(fm.grid(), fm.fit.eta, fm.covariance.v, prof, {t});
  CHECK(at[0].se * at[0].se == doctest::Approx(var).epsilon(0.15));
}

TEST_CASE("fully cured limit") {
  const BinGrid g({0.0, 1.0, 2.0});
  ParamVector eta(ParamLayout{2, 0, 0, 1});
  eta.theta() << 1.0, 2.0;
  eta.gamma() << -800.0;
  const CovariateProfile prof{vec({1.0}), Eigen::VectorXd(), {}, {}, Eigen::VectorXd()};
  const auto curve = predict_survival(g, eta, Eigen::MatrixXd::Zero(3, 3), prof, {0.5, 1.5, 2.0});
  for (const auto& p : curve) CHECK(p.survival == doctest::Approx(1.0));
}

TEST_CASE("minimum hazard of a prediction profile") {
  const BinGrid g({0.0, 1.0, 2.0});
  ParamVector eta(ParamLayout{2, 1, 1, 1});
  eta.theta() << 1.0, 2.0;
  eta.beta() << 3.0;
  eta.alpha() << -1.5;
  // x switches from 0 to 1 at t = 0.5: hazards -0.5, 2.5, 3.5 on the three pieces
  CovariateProfile prof{vec({0.0}), vec({1.0}), {0.5, 2.0}, Eigen::MatrixXd(2, 1), Eigen::VectorXd()};
  prof.tv_values << 0.0, 1.0;
  CHECK(min_profile_hazard(g, eta, prof, 2.0) == doctest::Approx(-0.5));
  prof.tv_values << 1.0, 0.0;  // 2.5, -0.5, 0.5
  CHECK(min_profile_hazard(g, eta, prof, 2.0) == doctest::Approx(-0.5));
  CHECK(min_profile_hazard(g, eta, prof, 0.5) == doctest::Approx(2.5));
  eta.alpha() << 0.0;
  CHECK(min_profile_hazard(g, eta, prof, 0.4) == doctest::Approx(4.0));
}
