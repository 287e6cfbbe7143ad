#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixcure {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for malformed input. Carries the 0-based record index when the
/// problem can be pinned to a single record.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::optional<std::size_t> row = {})
      : std::runtime_error(row ? what + " (row " + std::to_string(*row) + ")" : what),
        row_(row) {}
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

enum class CensoringKind { Event, Left, Right, Interval };

const char* to_string(CensoringKind kind);

/// One observed subject of a partly interval-censored sample.
///
/// The time-varying covariate schedule is piecewise constant: row a of
/// `tv_values` holds x on (tv_times[a-1], tv_times[a]] with tv_times[-1] = 0.
/// The last entry of `tv_times` is the subject's follow-up end t̃.
struct Subject {
  double t_left = 0.0;
  double t_right = kInf;
  CensoringKind kind = CensoringKind::Right;
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  std::vector<double> tv_times;
  Eigen::MatrixXd tv_values;

  /// t̃: t_right when finite, otherwise t_left.
  double follow_up_end() const { return std::isfinite(t_right) ? t_right : t_left; }
  std::size_t n_pieces() const { return tv_times.size(); }
  /// Index of the covariate piece containing t; t = 0 maps to the first
  /// piece and t beyond t̃ to the last.
  std::size_t piece_at(double t) const;
  /// x(t) for the piece containing t.
  Eigen::VectorXd x_at(double t) const;
  /// X(t) = ∫₀ᵗ x(s) ds, the last piece extended past t̃.
  Eigen::VectorXd x_integral(double t) const;
};

struct Dataset {
  std::vector<Subject> subjects;
  Eigen::Index q = 0;  // incidence covariates
  Eigen::Index r = 0;  // baseline latency covariates
  Eigen::Index p = 0;  // time-varying latency covariates

  std::size_t size() const { return subjects.size(); }
  std::size_t count(CensoringKind kind) const;
};

/// Block sizes of the parameter vector η = (θ, β, α, γ).
struct ParamLayout {
  Eigen::Index m = 0;
  Eigen::Index p = 0;
  Eigen::Index r = 0;
  Eigen::Index q = 0;

  Eigen::Index size() const { return m + p + r + q; }
  /// Length of the latency block (θ, β, α).
  Eigen::Index latency_size() const { return m + p + r; }
  Eigen::Index theta_offset() const { return 0; }
  Eigen::Index beta_offset() const { return m; }
  Eigen::Index alpha_offset() const { return m + p; }
  Eigen::Index gamma_offset() const { return m + p + r; }

  bool operator==(const ParamLayout&) const = default;
};

/// Flattened parameter vector with named block views. The block order
/// (θ, β, α, γ) is the only order used anywhere in the library.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(ParamLayout layout)
      : layout_(layout), values_(Eigen::VectorXd::Zero(layout.size())) {}
  ParamVector(ParamLayout layout, Eigen::VectorXd values);

  const ParamLayout& layout() const { return layout_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }

  auto theta() { return values_.segment(layout_.theta_offset(), layout_.m); }
  auto theta() const { return values_.segment(layout_.theta_offset(), layout_.m); }
  auto beta() { return values_.segment(layout_.beta_offset(), layout_.p); }
  auto beta() const { return values_.segment(layout_.beta_offset(), layout_.p); }
  auto alpha() { return values_.segment(layout_.alpha_offset(), layout_.r); }
  auto alpha() const { return values_.segment(layout_.alpha_offset(), layout_.r); }
  auto gamma() { return values_.segment(layout_.gamma_offset(), layout_.q); }
  auto gamma() const { return values_.segment(layout_.gamma_offset(), layout_.q); }
  auto latency() { return values_.head(layout_.latency_size()); }
  auto latency() const { return values_.head(layout_.latency_size()); }

 private:
  ParamLayout layout_;
  Eigen::VectorXd values_;
};

/// A record as read from the flat input format, before validation.
struct RawRecord {
  double t_left = 0.0;
  double t_right = kInf;
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  /// Optional piecewise schedule; empty means "constant x on [0, t̃]".
  std::vector<double> tv_times;
  Eigen::MatrixXd tv_values;
  /// Constant x used when no schedule is supplied (length p, may be empty).
  Eigen::VectorXd x_const;
};

/// Classifies (t_left, t_right) into a censoring kind. Throws InputError for
/// combinations that match no kind.
CensoringKind classify(double t_left, double t_right, std::optional<std::size_t> row = {});

/// Checks every subject invariant and returns the validated dataset.
Dataset validate_dataset(const std::vector<RawRecord>& records);

}  // namespace mixcure
