#pragma once

#include "mixcure/baseline.hpp"
#include "mixcure/core_types.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace mixcure {

struct ConstraintLabel {
  enum class Kind { Theta, Hazard } kind = Kind::Theta;
  Eigen::Index bin = 0;     // Theta rows
  std::size_t subject = 0;  // Hazard rows
  std::size_t piece = 0;    // Hazard rows
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Linear constraints Mη ≥ 0 (equivalently f(η) = −Mη ≤ 0).
///
/// The nominal system has m + Σ n_i rows: θ_u ≥ 0 first, then the subject
/// hazards h_i(t_ia) ≥ 0 grouped by subject and by piece. Rows with identical
/// coefficients are stored once; `unique_index` maps every nominal row onto
/// its stored row.
class ConstraintMatrix {
 public:
  ConstraintMatrix() = default;
  ConstraintMatrix(std::vector<ConstraintLabel> labels, std::vector<Eigen::Index> unique_index,
                   SparseRowMatrix unique_rows);

  /// Stored (deduplicated) rows, w × v.
  const SparseRowMatrix& matrix() const { return rows_; }
  Eigen::Index rows() const { return rows_.rows(); }
  Eigen::Index cols() const { return rows_.cols(); }

  const std::vector<ConstraintLabel>& labels() const { return labels_; }
  std::size_t nominal_rows() const { return labels_.size(); }
  Eigen::Index unique_index(std::size_t nominal) const { return unique_index_[nominal]; }
  /// The stored row each nominal row b maps to, as a dense nominal matrix.
  Eigen::MatrixXd nominal_matrix() const;
  /// All nominal rows sharing stored row k.
  std::vector<std::size_t> nominal_rows_of(Eigen::Index k) const;

 private:
  std::vector<ConstraintLabel> labels_;
  std::vector<Eigen::Index> unique_index_;
  SparseRowMatrix rows_;
};

ConstraintMatrix build_constraints(const Dataset& data, const BinGrid& grid);

struct FeasibilityReport {
  double min_slack = 0.0;
  /// Nominal rows with M_b η < −tol.
  std::vector<std::size_t> violating;
};

FeasibilityReport feasibility(const ConstraintMatrix& constraints, const Eigen::VectorXd& eta, double tol);

}  // namespace mixcure
