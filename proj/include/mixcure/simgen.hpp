#pragma once

#include "mixcure/core_types.hpp"

#include <cstdint>
#include <vector>

namespace mixcure {

/// Configuration of the synthetic partly interval-censored mixture-cure
/// generator. Defaults reproduce the 80% non-cured, 70% censoring design.
///
/// Incidence: z = (z1 ~ Bernoulli(0.5), z2 ~ Uniform(d1, d2)), logistic γ.
/// Latency: h(t) = 3t² + β1·1{t > t*} + α1 w1 + α2 w2 with w1 = z1,
/// w2 ~ Uniform(1, 2), t* ~ Uniform(0.5, 2.5).
struct Scenario {
  std::size_t n = 200;
  double d1 = 3.0;
  double d2 = 3.5;
  double censor_prop = 0.7;
  double gamma1 = -0.2;
  double gamma2 = 0.5;
  double alpha1 = -0.2;
  double alpha2 = 0.3;
  double beta1 = 0.5;
  /// Exponential(·) for the left end of the inspection interval. Read as a
  /// rate unless `exp_is_mean` is set.
  double exp_param = 3.0;
  bool exp_is_mean = false;
  double interval_width_max = 1.0;
  double cured_censor_max = 2.5;
  double switch_lo = 0.5;
  double switch_hi = 2.5;
  double w2_lo = 1.0;
  double w2_hi = 2.0;
  std::uint64_t seed = 1;
  /// Observations per bin used when fitting this scenario (0 = n^{1/3} bins).
  int n_obs_per_bin = 2;

  /// The design with the given size, non-cured target (0.6 or 0.8) and
  /// censoring proportion, using the matching (d1, d2) and n_o.
  static Scenario standard(std::size_t n, double non_cure_target, double censor_prop, std::uint64_t seed = 1);

  void validate() const;
  /// True (α1, α2, β1, γ1, γ2).
  std::vector<double> truth() const;
};

/// h₀(t) = 3t².
inline double true_baseline_hazard(double t) { return 3.0 * t * t; }

/// Latent quantities kept alongside a simulated dataset (never part of it).
struct LatentSubject {
  bool susceptible = false;
  double event_time = kInf;  // +∞ for cured subjects
  double tau = 0.0;          // S_i(event_time) for susceptible subjects
  double switch_time = 0.0;
  double linear = 0.0;       // α1 w1 + α2 w2
};

struct SimulatedData {
  Dataset data;
  std::vector<LatentSubject> latent;
  std::size_t resampled_tau = 0;
};

/// Root of H(t) + log τ = 0 for H(t) = t³ + c·t + β1·(t − t*)₊.
/// Throws std::domain_error if the root lies beyond `horizon`.
double solve_event_time(double c, double beta1, double t_star, double tau, double horizon = 50.0);

/// H(t) = t³ + c·t + β1·(t − t*)₊.
double generator_cum_hazard(double t, double c, double beta1, double t_star);

/// Subject i draws from its own stream (seed, i), so output is independent of
/// generation order.
SimulatedData simulate_dataset(const Scenario& scenario);

}  // namespace mixcure
