#include "mixcure/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixcure {

BinGrid::BinGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("BinGrid: need at least two edges");
  if (edges_.front() != 0.0) throw std::invalid_argument("BinGrid: first edge must be 0");
  for (std::size_t k = 1; k < edges_.size(); ++k)
    if (!(edges_[k] > edges_[k - 1]))
      throw std::invalid_argument("BinGrid: edges must be strictly increasing");
}

Eigen::Index BinGrid::bin_of(double t) const {
  if (t < 0.0 || std::isnan(t)) throw std::domain_error("BinGrid: negative time");
  // first edge e_k >= t with k >= 1 gives bin k-1
  auto it = std::lower_bound(edges_.begin() + 1, edges_.end(), t);
  if (it == edges_.end()) return m() - 1;
  return static_cast<Eigen::Index>(it - edges_.begin()) - 1;
}

std::vector<double> bin_observations(const Dataset& data) {
  std::vector<double> obs;
  obs.reserve(2 * data.size());
  for (const Subject& s : data.subjects) {
    switch (s.kind) {
      case CensoringKind::Event: obs.push_back(s.t_left); break;
      case CensoringKind::Left: obs.push_back(s.t_right); break;
      case CensoringKind::Interval:
        obs.push_back(s.t_left);
        obs.push_back(s.t_right);
        break;
      case CensoringKind::Right: break;
    }
  }
  std::sort(obs.begin(), obs.end());
  return obs;
}

namespace {

// Builds edges from chunk boundaries: `starts` holds the index of the first
// observation of every chunk after the first.
BinGrid edges_from_chunks(const std::vector<double>& obs, const std::vector<std::size_t>& starts) {
  std::vector<double> edges{0.0};
  for (std::size_t k : starts) {
    const double e = 0.5 * (obs[k - 1] + obs[k]);
    // ties across a chunk boundary would create an empty bin; merge instead
    if (e > edges.back() && e < obs.back()) edges.push_back(e);
  }
  edges.push_back(obs.back());
  return BinGrid(std::move(edges));
}

void check_observations(const std::vector<double>& obs) {
  if (obs.empty()) throw InputError("no finite observations to build bins from");
  if (!(obs.back() > 0.0)) throw InputError("all observations are at time 0");
}

}  // namespace

BinGrid build_bins(const Dataset& data, int n_obs_per_bin) {
  const auto obs = bin_observations(data);
  check_observations(obs);
  if (n_obs_per_bin <= 0) throw InputError("observations per bin must be positive");
  const auto n_o = static_cast<std::size_t>(n_obs_per_bin);
  if (n_o > obs.size())
    throw InputError("observations per bin (" + std::to_string(n_o) + ") exceeds observation count (" +
                     std::to_string(obs.size()) + ")");
  std::vector<std::size_t> starts;
  for (std::size_t k = n_o; k + n_o <= obs.size(); k += n_o) starts.push_back(k);
  return edges_from_chunks(obs, starts);
}

BinGrid build_bins_by_count(const Dataset& data, int m) {
  const auto obs = bin_observations(data);
  check_observations(obs);
  if (m <= 0) throw InputError("bin count must be positive");
  const std::size_t bins = std::min<std::size_t>(static_cast<std::size_t>(m), obs.size());
  std::vector<std::size_t> starts;
  for (std::size_t k = 1; k < bins; ++k) starts.push_back(k * obs.size() / bins);
  return edges_from_chunks(obs, starts);
}

int default_bin_count(std::size_t n) {
  return std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(n)))));
}

Eigen::VectorXd basis_at(const BinGrid& grid, double t) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(grid.m());
  psi(grid.bin_of(t)) = 1.0;
  return psi;
}

Eigen::VectorXd basis_integral_at(const BinGrid& grid, double t) {
  const Eigen::Index u = grid.bin_of(t);
  Eigen::VectorXd big_psi = Eigen::VectorXd::Zero(grid.m());
  for (Eigen::Index k = 0; k < u; ++k) big_psi(k) = grid.width(k);
  big_psi(u) = t - grid.edges()[u];
  return big_psi;
}

Eigen::MatrixXd penalty_matrix(Eigen::Index m) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 1; j + 1 < m; ++j) {
    const Eigen::Index idx[3] = {j - 1, j, j + 1};
    const double coef[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r(idx[a], idx[b]) += coef[a] * coef[b];
  }
  return r;
}

}  // namespace mixcure
