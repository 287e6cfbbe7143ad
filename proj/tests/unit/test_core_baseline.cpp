#include "helpers.hpp"
#include "mixcure/baseline.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

using namespace mixcure;
using namespace mixcure::testing;

TEST_CASE("classify follows the interval convention") {
  CHECK(classify(1.0, 1.0) == CensoringKind::Event);
  CHECK(classify(0.0, 0.7) == CensoringKind::Left);
  CHECK(classify(2.0, kInf) == CensoringKind::Right);
  CHECK(classify(0.5, 1.5) == CensoringKind::Interval);
  CHECK_THROWS_AS(classify(2.0, 1.0), InputError);
  CHECK_THROWS_AS(classify(-1.0, 1.0), InputError);
}

TEST_CASE("validate_dataset names the offending row") {
  std::vector<RawRecord> raw{record(1.0, 1.0, vec({1.0}), vec({0.0})), record(2.0, 1.0, vec({1.0}), vec({0.0}))};
  try {
    validate_dataset(raw);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    REQUIRE(e.row().has_value());
    CHECK(*e.row() == 1);
  }
  raw[1] = record(1.0, 2.0, vec({1.0, 2.0}), vec({0.0}));
  CHECK_THROWS_AS(validate_dataset(raw), InputError);

  RawRecord bad = record(1.0, 2.0, vec({1.0}), vec({0.0}));
  bad.tv_times = {1.5, 1.0, 2.0};
  bad.tv_values = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(validate_dataset({bad}), InputError);
}

TEST_CASE("exactly one censoring kind per subject and constant schedules by default") {
  const Dataset d = validate_dataset({record(1.0, 1.0, vec({}), vec({}), vec({2.0})),
                                      record(0.0, 0.7, vec({}), vec({}), vec({2.0})),
                                      record(2.0, kInf, vec({}), vec({}), vec({2.0})),
                                      record(0.5, 1.5, vec({}), vec({}), vec({2.0}))});
  CHECK(d.count(CensoringKind::Event) + d.count(CensoringKind::Left) + d.count(CensoringKind::Right) +
            d.count(CensoringKind::Interval) ==
        4);
  CHECK(d.subjects[3].tv_times == std::vector<double>{1.5});
  CHECK(d.subjects[2].tv_times == std::vector<double>{2.0});
}

TEST_CASE("x_integral accumulates piece overlaps") {
  RawRecord r = record(1.5, 1.5, vec({}), vec({}));
  r.tv_times = {0.5, 1.5};
  r.tv_values = Eigen::MatrixXd(2, 1);
  r.tv_values << 0.0, 1.0;
  const Subject s = validate_dataset({r}).subjects[0];
  CHECK(s.x_integral(1.5)(0) == doctest::Approx(1.0));
  CHECK(s.x_integral(0.0)(0) == 0.0);
  CHECK(s.x_integral(2.0)(0) == doctest::Approx(1.5));
  CHECK(s.x_at(0.5)(0) == 0.0);
  CHECK(s.x_at(0.6)(0) == 1.0);
}

TEST_CASE("ParamVector blocks follow theta, beta, alpha, gamma") {
  ParamLayout lay{3, 1, 2, 2};
  ParamVector eta(lay, Eigen::VectorXd::LinSpaced(8, 0, 7));
  CHECK(eta.theta()(2) == 2.0);
  CHECK(eta.beta()(0) == 3.0);
  CHECK(eta.alpha()(1) == 5.0);
  CHECK(eta.gamma()(0) == 6.0);
  CHECK_THROWS(ParamVector(lay, Eigen::VectorXd::Zero(7)));
}

TEST_CASE("build_bins chunk-midpoint rule") {
  auto events = [](std::initializer_list<double> ts) {
    std::vector<RawRecord> raw;
    for (double t : ts) raw.push_back(record(t, t, vec({}), vec({})));
    return validate_dataset(raw);
  };
  CHECK(build_bins(events({1, 2, 3, 4}), 2).edges() == std::vector<double>{0, 2.5, 4});
  CHECK(build_bins(events({1, 2}), 2).edges() == std::vector<double>{0, 2});
  // a short trailing chunk merges into its predecessor
  CHECK(build_bins(events({1, 2, 3, 4, 5}), 2).edges() == std::vector<double>{0, 2.5, 5});
  CHECK_THROWS(build_bins(events({1}), 2));
  // interval endpoints both count; right-censored times do not
  const Dataset mixed = validate_dataset({record(0.5, 1.5, vec({}), vec({})), record(3.0, kInf, vec({}), vec({})),
                                          record(0.0, 2.0, vec({}), vec({}))});
  CHECK(bin_observations(mixed) == std::vector<double>{0.5, 1.5, 2.0});
}

TEST_CASE("basis and integrated basis on edges {0, 2.5, 4}") {
  const BinGrid g({0.0, 2.5, 4.0});
  CHECK(basis_at(g, 1.0) == vec({1, 0}));
  CHECK(basis_at(g, 2.5) == vec({1, 0}));
  CHECK(basis_at(g, 3.0) == vec({0, 1}));
  CHECK(basis_at(g, 0.0) == vec({1, 0}));
  CHECK(basis_at(g, 9.0) == vec({0, 1}));
  CHECK(basis_integral_at(g, 3.0).isApprox(vec({2.5, 0.5})));
  CHECK(basis_integral_at(g, 0.0) == vec({0, 0}));
  CHECK(basis_integral_at(g, 4.0).isApprox(vec({2.5, 1.5})));
  CHECK(basis_integral_at(g, 5.0).isApprox(vec({2.5, 2.5})));
  CHECK_THROWS(basis_at(g, -1.0));
}

TEST_CASE("integrated basis derivative equals the basis") {
  const BinGrid g({0.0, 0.3, 1.1, 2.0, 2.2});
  for (double t : {0.1, 0.7, 1.5, 2.1}) {
    const Eigen::VectorXd d = (basis_integral_at(g, t + 1e-7) - basis_integral_at(g, t - 1e-7)) / 2e-7;
    CHECK((d - basis_at(g, t)).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(basis_at(g, t).sum() == 1.0);
  }
}

TEST_CASE("second-difference penalty") {
  const Eigen::MatrixXd r = penalty_matrix(4);
  CHECK(vec({1, 1, 1, 1}).dot(r * vec({1, 1, 1, 1})) == doctest::Approx(0.0));
  CHECK(vec({1, 2, 3, 4}).dot(r * vec({1, 2, 3, 4})) == doctest::Approx(0.0));
  CHECK(vec({1, 0, 0, 0}).dot(r * vec({1, 0, 0, 0})) == doctest::Approx(1.0));
  CHECK((r - r.transpose()).norm() == 0.0);
  CHECK(penalty_matrix(2).norm() == 0.0);

  const Eigen::MatrixXd r7 = penalty_matrix(7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r7);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
  int rank = 0;
  for (Eigen::Index k = 0; k < 7; ++k) rank += es.eigenvalues()(k) > 1e-10;
  CHECK(rank == 5);
  // direct sum oracle
  Eigen::VectorXd th = Eigen::VectorXd::Random(7);
  double direct = 0.0;
  for (int j = 1; j < 6; ++j) direct += std::pow(th(j - 1) - 2 * th(j) + th(j + 1), 2);
  CHECK(th.dot(r7 * th) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("default bin count") {
  CHECK(default_bin_count(200) == 6);
  CHECK(default_bin_count(1000) == 10);
  CHECK(default_bin_count(1) == 1);
}
