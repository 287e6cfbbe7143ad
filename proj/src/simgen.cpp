#include "mixcure/simgen.hpp"

#include "mixcure/model.hpp"
#include "mixcure/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mixcure {

Scenario Scenario::standard(std::size_t n, double non_cure_target, double censor_prop, std::uint64_t seed) {
  Scenario s;
  s.n = n;
  if (std::abs(non_cure_target - 0.8) < 1e-9) {
    s.d1 = 3.0;
    s.d2 = 3.5;
  } else if (std::abs(non_cure_target - 0.6) < 1e-9) {
    s.d1 = 1.0;
    s.d2 = 1.2;
  } else {
    throw std::invalid_argument("standard scenario: non-cured target must be 0.6 or 0.8");
  }
  s.censor_prop = censor_prop;
  s.seed = seed;
  s.n_obs_per_bin = n <= 200 ? 2 : (n <= 500 ? 3 : 4);
  return s;
}

void Scenario::validate() const {
  if (n == 0) throw std::invalid_argument("scenario: n must be positive");
  if (!(d2 >= d1)) throw std::invalid_argument("scenario: d2 must be >= d1");
  if (!(censor_prop >= 0.0 && censor_prop <= 1.0)) throw std::invalid_argument("scenario: censor_prop outside [0, 1]");
  if (!(exp_param > 0.0)) throw std::invalid_argument("scenario: exponential parameter must be positive");
  if (!(interval_width_max >= 0.0)) throw std::invalid_argument("scenario: interval width must be nonnegative");
  if (!(cured_censor_max > 0.0)) throw std::invalid_argument("scenario: cured censoring bound must be positive");
  if (!(switch_hi >= switch_lo && switch_lo >= 0.0)) throw std::invalid_argument("scenario: bad switch-time range");
  if (!(w2_hi >= w2_lo)) throw std::invalid_argument("scenario: bad w2 range");
  if (n_obs_per_bin < 0) throw std::invalid_argument("scenario: n_obs_per_bin must be nonnegative");
}

std::vector<double> Scenario::truth() const { return {alpha1, alpha2, beta1, gamma1, gamma2}; }

double generator_cum_hazard(double t, double c, double beta1, double t_star) {
  double h = t * t * t + c * t;
  if (t > t_star) h += beta1 * (t - t_star);
  return h;
}

double solve_event_time(double c, double beta1, double t_star, double tau, double horizon) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("solve_event_time: tau must lie in (0, 1)");
  const double target = -std::log(tau);
  auto f = [&](double t) { return generator_cum_hazard(t, c, beta1, t_star) - target; };
  auto df = [&](double t) { return 3.0 * t * t + c + (t > t_star ? beta1 : 0.0); };

  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (lo > horizon) throw std::domain_error("solve_event_time: root beyond horizon");
  }
  // f(lo) < 0 <= f(hi); safeguarded Newton
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (std::abs(ft) < 1e-13 * std::max(1.0, target)) break;
    if (ft < 0.0) lo = t; else hi = t;
    const double d = df(t);
    double next = d > 0.0 ? t - ft / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  if (t > horizon) throw std::domain_error("solve_event_time: root beyond horizon");
  return t;
}

SimulatedData simulate_dataset(const Scenario& sc) {
  sc.validate();
  SimulatedData out;
  out.data.q = 2;
  out.data.r = 2;
  out.data.p = 1;
  out.data.subjects.reserve(sc.n);
  out.latent.reserve(sc.n);
  const Eigen::Vector2d gamma(sc.gamma1, sc.gamma2);
  const double exp_rate = sc.exp_is_mean ? 1.0 / sc.exp_param : sc.exp_param;

  for (std::size_t i = 0; i < sc.n; ++i) {
    Stream rng(sc.seed, i);
    Subject s;
    LatentSubject lat;
    const double z1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double z2 = rng.uniform(sc.d1, sc.d2);
    s.z = Eigen::Vector2d(z1, z2);
    const double pi = incidence_prob(gamma, s.z);
    lat.susceptible = rng.uniform() <= pi;
    const double w2 = rng.uniform(sc.w2_lo, sc.w2_hi);
    s.w = Eigen::Vector2d(z1, w2);
    lat.switch_time = rng.uniform(sc.switch_lo, sc.switch_hi);
    lat.linear = sc.alpha1 * z1 + sc.alpha2 * w2;

    if (!lat.susceptible) {
      s.t_left = rng.uniform(0.0, sc.cured_censor_max);
      s.t_right = kInf;
      s.kind = CensoringKind::Right;
    } else {
      for (;;) {
        lat.tau = rng.uniform();
        try {
          lat.event_time = solve_event_time(lat.linear, sc.beta1, lat.switch_time, lat.tau);
          break;
        } catch (const std::domain_error&) {
          ++out.resampled_tau;
        }
      }
      const double u_c = rng.uniform();
      const double left = rng.exponential(exp_rate);
      const double right = left + rng.uniform(0.0, sc.interval_width_max);
      const double t = lat.event_time;
      if (u_c >= sc.censor_prop) {
        s.t_left = s.t_right = t;
        s.kind = CensoringKind::Event;
      } else if (t <= left) {
        s.t_left = 0.0;
        s.t_right = left;
        s.kind = CensoringKind::Left;
      } else if (t <= right) {
        s.t_left = left;
        s.t_right = right;
        s.kind = CensoringKind::Interval;
      } else {
        s.t_left = right;
        s.t_right = kInf;
        s.kind = CensoringKind::Right;
      }
    }

    const double end = s.follow_up_end();
    if (lat.switch_time < end) {
      s.tv_times = {lat.switch_time, end};
      s.tv_values = Eigen::Vector2d(0.0, 1.0);
    } else {
      s.tv_times = {end};
      s.tv_values = Eigen::MatrixXd::Zero(1, 1);
    }
    out.data.subjects.push_back(std::move(s));
    out.latent.push_back(lat);
  }
  return out;
}

}  // namespace mixcure
