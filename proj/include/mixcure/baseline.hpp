#pragma once

#include "mixcure/core_types.hpp"

#include <Eigen/Core>

#include <vector>

namespace mixcure {

/// Partition 0 = e_0 < e_1 < ... < e_m of the follow-up window into the bins
/// of the indicator basis. Bin u (1-based in the math, 0-based here) is the
/// half-open interval (e_{u-1}, e_u]; t = 0 belongs to the first bin and times
/// past e_m are treated as belonging to the last bin.
class BinGrid {
 public:
  BinGrid() = default;
  explicit BinGrid(std::vector<double> edges);

  const std::vector<double>& edges() const { return edges_; }
  Eigen::Index m() const { return static_cast<Eigen::Index>(edges_.size()) - 1; }
  double upper() const { return edges_.back(); }
  double width(Eigen::Index u) const { return edges_[u + 1] - edges_[u]; }
  double midpoint(Eigen::Index u) const { return 0.5 * (edges_[u] + edges_[u + 1]); }

  /// 0-based bin index containing t.
  Eigen::Index bin_of(double t) const;

 private:
  std::vector<double> edges_;
};

/// The time points used to size bins: event times, right ends of left
/// censoring intervals, and both ends of finite interval-censoring intervals.
std::vector<double> bin_observations(const Dataset& data);

/// Chunks the sorted observations into runs of `n_obs_per_bin`, placing edges
/// at midpoints between consecutive chunks. A short trailing chunk merges into
/// its predecessor.
BinGrid build_bins(const Dataset& data, int n_obs_per_bin);

/// Splits the sorted observations into `m` chunks of near-equal size, with
/// the same midpoint edge rule as build_bins.
BinGrid build_bins_by_count(const Dataset& data, int m);

/// round(n^{1/3}), at least 1.
int default_bin_count(std::size_t n);

/// ψ(t): one-hot indicator of the bin containing t.
Eigen::VectorXd basis_at(const BinGrid& grid, double t);

/// Ψ(t) = ∫₀ᵗ ψ(s) ds: per-bin overlap of [0, t]; the last bin keeps
/// accruing past e_m.
Eigen::VectorXd basis_integral_at(const BinGrid& grid, double t);

/// R = DᵀD with D the (m−2)×m second-difference operator, so that
/// θᵀRθ = Σ_j (θ_{j−1} − 2θ_j + θ_{j+1})². Zero for m < 3.
Eigen::MatrixXd penalty_matrix(Eigen::Index m);

}  // namespace mixcure
