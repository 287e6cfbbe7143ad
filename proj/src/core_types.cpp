#include "mixcure/core_types.hpp"

#include <algorithm>

namespace mixcure {

const char* to_string(CensoringKind kind) {
  switch (kind) {
    case CensoringKind::Event: return "event";
    case CensoringKind::Left: return "left";
    case CensoringKind::Right: return "right";
    case CensoringKind::Interval: return "interval";
  }
  return "unknown";
}

std::size_t Subject::piece_at(double t) const {
  // first a with t <= tv_times[a]; pieces are (t_{a-1}, t_a]
  auto it = std::lower_bound(tv_times.begin(), tv_times.end(), t);
  if (it == tv_times.end()) return tv_times.size() - 1;
  return static_cast<std::size_t>(it - tv_times.begin());
}

Eigen::VectorXd Subject::x_at(double t) const {
  if (tv_values.cols() == 0) return Eigen::VectorXd();
  return tv_values.row(static_cast<Eigen::Index>(piece_at(t))).transpose();
}

Eigen::VectorXd Subject::x_integral(double t) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(tv_values.cols());
  if (acc.size() == 0) return acc;
  double prev = 0.0;
  const std::size_t last = tv_times.size() - 1;
  for (std::size_t a = 0; a < tv_times.size(); ++a) {
    const double hi = (a == last) ? std::max(t, tv_times[a]) : tv_times[a];
    const double upto = std::min(t, hi);
    if (upto <= prev) break;
    acc += (upto - prev) * tv_values.row(static_cast<Eigen::Index>(a)).transpose();
    prev = hi;
  }
  return acc;
}

std::size_t Dataset::count(CensoringKind kind) const {
  return static_cast<std::size_t>(std::count_if(subjects.begin(), subjects.end(),
                                                [kind](const Subject& s) { return s.kind == kind; }));
}

ParamVector::ParamVector(ParamLayout layout, Eigen::VectorXd values)
    : layout_(layout), values_(std::move(values)) {
  if (values_.size() != layout_.size())
    throw std::invalid_argument("ParamVector: value length does not match layout");
}

CensoringKind classify(double t_left, double t_right, std::optional<std::size_t> row) {
  if (std::isnan(t_left) || std::isnan(t_right)) throw InputError("time is NaN", row);
  if (t_left < 0.0 || t_right < 0.0) throw InputError("negative time", row);
  if (!std::isfinite(t_left)) throw InputError("t_left must be finite", row);
  if (t_left > t_right) throw InputError("t_left exceeds t_right", row);
  if (!std::isfinite(t_right)) return CensoringKind::Right;
  if (t_left == t_right) return CensoringKind::Event;
  if (t_left == 0.0) return CensoringKind::Left;
  return CensoringKind::Interval;
}

Dataset validate_dataset(const std::vector<RawRecord>& records) {
  Dataset out;
  if (records.empty()) return out;
  out.q = records.front().z.size();
  out.r = records.front().w.size();
  const auto& first = records.front();
  out.p = first.tv_times.empty() ? first.x_const.size() : first.tv_values.cols();

  out.subjects.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& rec = records[i];
    Subject s;
    s.kind = classify(rec.t_left, rec.t_right, i);
    s.t_left = rec.t_left;
    s.t_right = rec.t_right;
    if (rec.z.size() != out.q) throw InputError("incidence covariate count mismatch", i);
    if (rec.w.size() != out.r) throw InputError("baseline covariate count mismatch", i);
    if (!rec.z.allFinite() || !rec.w.allFinite()) throw InputError("non-finite covariate", i);
    s.z = rec.z;
    s.w = rec.w;

    const double end = s.follow_up_end();
    if (!(end > 0.0)) throw InputError("follow-up end must be positive", i);

    if (rec.tv_times.empty()) {
      if (rec.x_const.size() != out.p) throw InputError("time-varying covariate count mismatch", i);
      s.tv_times = {end};
      s.tv_values = rec.x_const.transpose();
    } else {
      if (rec.tv_values.cols() != out.p) throw InputError("time-varying covariate count mismatch", i);
      if (static_cast<std::size_t>(rec.tv_values.rows()) != rec.tv_times.size())
        throw InputError("time-varying schedule has mismatched lengths", i);
      double prev = 0.0;
      for (double t : rec.tv_times) {
        if (!(t > prev)) throw InputError("tv_times not strictly increasing from 0", i);
        prev = t;
      }
      if (rec.tv_times.back() != end)
        throw InputError("tv_times must end at the follow-up end", i);
      if (!rec.tv_values.allFinite()) throw InputError("non-finite time-varying covariate", i);
      s.tv_times = rec.tv_times;
      s.tv_values = rec.tv_values;
    }
    out.subjects.push_back(std::move(s));
  }
  return out;
}

}  // namespace mixcure
