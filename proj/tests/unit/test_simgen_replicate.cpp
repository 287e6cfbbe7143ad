#include "helpers.hpp"
#include "mixcure/replicate.hpp"
#include "mixcure/simgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace mixcure;
using namespace mixcure::testing;

namespace {

/// Plain bisection on H(t) + log τ, independent of the library root finder.
double bisect(double c, double beta1, double t_star, double tau) {
  auto f = [&](double t) {
    return t * t * t + c * t + beta1 * std::max(t - t_star, 0.0) + std::log(tau);
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("event-time inversion") {
  CHECK(solve_event_time(0.0, 0.5, 5.0, std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  const double t = solve_event_time(0.1, 0.5, 5.0, std::exp(-1.0));
  CHECK(std::abs(t - bisect(0.1, 0.5, 5.0, std::exp(-1.0))) < 1e-8);
  CHECK(t == doctest::Approx(0.9666794232332974).epsilon(1e-12));  // root of t³ + 0.1t = 1

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double c = 0.5 * u(gen), b = u(gen), ts = 0.5 + 2.0 * u(gen), tau = u(gen);
    const double root = solve_event_time(c, b, ts, tau);
    CHECK(std::abs(generator_cum_hazard(root, c, b, ts) + std::log(tau)) < 1e-10);
    CHECK(std::abs(root - bisect(c, b, ts, tau)) < 1e-8);
    // continuity across the switch
    CHECK(std::abs(generator_cum_hazard(ts * (1 - 1e-13), c, b, ts) - generator_cum_hazard(ts, c, b, ts)) < 1e-10);
  }
  CHECK_THROWS_AS(solve_event_time(0.0, 0.0, 1.0, 1e-300, 5.0), std::domain_error);
}

TEST_CASE("simulated datasets are seed-deterministic") {
  const Scenario sc = Scenario::standard(80, 0.8, 0.7, 42);
  const SimulatedData a = simulate_dataset(sc), b = simulate_dataset(sc);
  REQUIRE(a.data.size() == 80);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    CHECK(a.data.subjects[i].t_left == b.data.subjects[i].t_left);
    CHECK(a.data.subjects[i].t_right == b.data.subjects[i].t_right);
    CHECK(a.data.subjects[i].z == b.data.subjects[i].z);
  }
  Scenario other = sc;
  other.seed = 43;
  CHECK(simulate_dataset(other).data.subjects[0].t_left != a.data.subjects[0].t_left);
}

TEST_CASE("simulated subjects respect the latent event times") {
  const SimulatedData sim = simulate_dataset(Scenario::standard(2000, 0.8, 0.7, 5));
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const Subject& s = sim.data.subjects[i];
    const LatentSubject& l = sim.latent[i];
    if (!l.susceptible) {
      CHECK(s.kind == CensoringKind::Right);
      CHECK(s.t_left <= 2.5);
      continue;
    }
    const double h = generator_cum_hazard(l.event_time, l.linear, 0.5, l.switch_time);
    CHECK(std::abs(std::exp(-h) - l.tau) < 1e-8);
    switch (s.kind) {
      case CensoringKind::Event: CHECK(s.t_left == l.event_time); break;
      case CensoringKind::Left: CHECK(l.event_time <= s.t_right); break;
      case CensoringKind::Interval:
        CHECK(s.t_left < l.event_time);
        CHECK(l.event_time <= s.t_right);
        break;
      case CensoringKind::Right: CHECK(l.event_time > s.t_left); break;
    }
    CHECK(s.w(0) == s.z(0));
    CHECK(s.n_pieces() <= 2);
  }
}

TEST_CASE("no censoring leaves every susceptible subject an event") {
  Scenario sc = Scenario::standard(300, 0.6, 0.0, 8);
  const SimulatedData sim = simulate_dataset(sc);
  for (std::size_t i = 0; i < sim.data.size(); ++i)
    if (sim.latent[i].susceptible) CHECK(sim.data.subjects[i].kind == CensoringKind::Event);
}

TEST_CASE("scenario validation") {
  Scenario sc;
  sc.d2 = 1.0;
  CHECK_THROWS(sc.validate());
  CHECK_THROWS(Scenario::standard(10, 0.7, 0.7));
  CHECK(Scenario::standard(1000, 0.8, 0.7).n_obs_per_bin == 4);
  CHECK(Scenario::standard(500, 0.8, 0.7).n_obs_per_bin == 3);
  CHECK(Scenario::standard(200, 0.8, 0.7).n_obs_per_bin == 2);
}

TEST_CASE("metrics of exact estimates") {
  const ParameterMetrics m = compute_metrics("a", 0.3, {0.3, 0.3, 0.3}, {0.1, 0.2, 0.0});
  CHECK(m.abias == 0.0);
  CHECK(m.mcsd == 0.0);
  CHECK(m.mse == 0.0);
  CHECK(m.cp == 1.0);
}

TEST_CASE("halving the standard error destroys coverage") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> est, se, half;
  for (int k = 0; k < 4000; ++k) {
    est.push_back(nd(gen));
    se.push_back(1.0);
    half.push_back(0.5);
  }
  const ParameterMetrics full = compute_metrics("x", 0.0, est, se);
  const ParameterMetrics bad = compute_metrics("x", 0.0, est, half);
  CHECK(full.cp == doctest::Approx(0.95).epsilon(0.02));
  CHECK(bad.cp < 0.75);
  CHECK(full.mse >= full.abias * full.abias);
  CHECK(full.aasd == 1.0);
}

TEST_CASE("quantile and integrated squared error") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({5.0}, 0.9) == 5.0);
  // ∫₀¹ (3t²)² dt = 9/5 with θ = 0
  const BinGrid g({0.0, 1.0});
  CHECK(integrated_squared_error(g, vec({0.0}), 1.0) == doctest::Approx(1.8).epsilon(1e-4));
  // (3t² − 1)² integrates to 9/5 − 2 + 1 = 0.8
  CHECK(integrated_squared_error(g, vec({1.0}), 1.0) == doctest::Approx(0.8).epsilon(1e-4));
}

TEST_CASE("aggregate ignores replicate order and excludes failures") {
  const Scenario sc = Scenario::standard(50, 0.8, 0.7, 1);
  std::vector<ReplicateOutcome> outs;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 0.1);
  for (std::size_t k = 0; k < 6; ++k) {
    ReplicateOutcome o;
    o.index = k;
    o.converged = k != 2;
    if (!o.converged) o.failure = "solver: max_iterations";
    for (double t : sc.truth()) {
      o.estimate.push_back(t + nd(gen));
      o.se.push_back(0.1);
    }
    o.hazard_time = {0.5, 0.8, 1.0};
    o.hazard_estimate = {0.7, 1.9, 3.1};
    o.hazard_se = {0.1, 0.1, 0.1};
    o.ise = 0.1 * static_cast<double>(k);
    outs.push_back(o);
  }
  auto shuffled = outs;
  std::reverse(shuffled.begin(), shuffled.end());
  const MetricReport a = aggregate(sc, outs), b = aggregate(sc, shuffled);
  CHECK(a.reps == 6);
  CHECK(a.converged == 5);
  CHECK(a.exclusion_rate() == doctest::Approx(1.0 / 6.0));
  for (std::size_t j = 0; j < a.parameters.size(); ++j) {
    CHECK(a.parameters[j].mcsd == b.parameters[j].mcsd);
    CHECK(a.parameters[j].cp == b.parameters[j].cp);
    CHECK(a.parameters[j].mse >= a.parameters[j].abias * a.parameters[j].abias);
  }
  CHECK(a.aise == b.aise);
  CHECK(a.parameter("alpha1").truth == -0.2);

  for (auto& o : outs) o.converged = false;
  CHECK_THROWS_AS(aggregate(sc, outs), std::runtime_error);
}

TEST_CASE("replicates run in parallel give the serial result") {
  const Scenario sc = Scenario::standard(80, 0.8, 0.7, 2);
  const FitOptions opt = scenario_fit_options(sc);
  const auto serial = run_replicates(sc, 3, opt, 1);
  const auto parallel = run_replicates(sc, 3, opt, 3);
  REQUIRE(serial.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(serial[k].index == k);
    CHECK(serial[k].converged == parallel[k].converged);
    CHECK(serial[k].estimate == parallel[k].estimate);
    CHECK(serial[k].ise == parallel[k].ise);
  }
}
