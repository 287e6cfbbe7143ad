#include "mixcure/constraints.hpp"


#include <limits>
#include <map>

namespace mixcure {

ConstraintMatrix::ConstraintMatrix(std::vector<ConstraintLabel> labels, std::vector<Eigen::Index> unique_index,
                                   SparseRowMatrix unique_rows)
    : labels_(std::move(labels)), unique_index_(std::move(unique_index)), rows_(std::move(unique_rows)) {}

Eigen::MatrixXd ConstraintMatrix::nominal_matrix() const {
  const Eigen::MatrixXd dense(rows_);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(labels_.size()), rows_.cols());
  for (std::size_t b = 0; b < labels_.size(); ++b) out.row(static_cast<Eigen::Index>(b)) = dense.row(unique_index_[b]);
  return out;
}

std::vector<std::size_t> ConstraintMatrix::nominal_rows_of(Eigen::Index k) const {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < unique_index_.size(); ++b)
    if (unique_index_[b] == k) out.push_back(b);
  return out;
}

ConstraintMatrix build_constraints(const Dataset& data, const BinGrid& grid) {
  const ParamLayout layout{grid.m(), data.p, data.r, data.q};
  const Eigen::Index m = layout.m;

  // Key: (bin, x, w). A θ row is the key (u, 0, 0).
  std::map<std::vector<double>, Eigen::Index> seen;
  std::vector<std::vector<double>> keys;
  std::vector<ConstraintLabel> labels;
  std::vector<Eigen::Index> unique_index;

  auto intern = [&](std::vector<double> key) {
    auto [it, inserted] = seen.emplace(key, static_cast<Eigen::Index>(keys.size()));
    if (inserted) keys.push_back(std::move(key));
    return it->second;
  };

  const std::size_t tail = static_cast<std::size_t>(layout.p + layout.r);
  for (Eigen::Index u = 0; u < m; ++u) {
    std::vector<double> key(1 + tail, 0.0);
    key[0] = static_cast<double>(u);
    labels.push_back({ConstraintLabel::Kind::Theta, u, 0, 0});
    unique_index.push_back(intern(std::move(key)));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data.subjects[i];
    for (std::size_t a = 0; a < s.n_pieces(); ++a) {
      const double t = s.tv_times[a];
      std::vector<double> key;
      key.reserve(1 + tail);
      key.push_back(static_cast<double>(grid.bin_of(t)));
      for (Eigen::Index j = 0; j < layout.p; ++j) key.push_back(s.tv_values(static_cast<Eigen::Index>(a), j));
      for (Eigen::Index j = 0; j < layout.r; ++j) key.push_back(s.w(j));
      labels.push_back({ConstraintLabel::Kind::Hazard, 0, i, a});
      unique_index.push_back(intern(std::move(key)));
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const auto& key = keys[k];
    triplets.emplace_back(row, static_cast<Eigen::Index>(key[0]), 1.0);
    for (std::size_t j = 1; j < key.size(); ++j)
      if (key[j] != 0.0) triplets.emplace_back(row, m + static_cast<Eigen::Index>(j - 1), key[j]);
  }
  SparseRowMatrix rows(static_cast<Eigen::Index>(keys.size()), layout.size());
  rows.setFromTriplets(triplets.begin(), triplets.end());
  return ConstraintMatrix(std::move(labels), std::move(unique_index), std::move(rows));
}

FeasibilityReport feasibility(const ConstraintMatrix& constraints, const Eigen::VectorXd& eta, double tol) {
  const Eigen::VectorXd slack = constraints.matrix() * eta;
  FeasibilityReport report;
  report.min_slack = slack.size() ? slack.minCoeff() : std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < constraints.nominal_rows(); ++b)
    if (slack(constraints.unique_index(b)) < -tol) report.violating.push_back(b);
  return report;
}

}  // namespace mixcure
