#pragma once

#include "mixcure/fit.hpp"
#include "mixcure/inference.hpp"
#include "mixcure/replicate.hpp"
#include "mixcure/simgen.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mixcure::io {

using Json = nlohmann::ordered_json;

/// Library version string.
const char* library_version();

/// %.17g, with `inf`/`-inf`/`nan` tokens.
std::string format_number(double x);
/// Parses a number or an `inf` token. Throws InputError naming the line.
double parse_number(std::string_view token, std::size_t line, std::string_view column);

std::vector<std::string> split_csv_line(std::string_view line);

/// A dataset with the covariate names taken from the file header.
struct NamedDataset {
  Dataset data;
  CovariateNames names;
};

/// Flat file: header `t_left,t_right` plus `z_*`, `w_*` and optional constant
/// `x_*` columns, and an optional `id` column. The optional long-format file
/// has header `id,time,x_*`; a row (id, t, x) holds x on the piece ending at
/// t, pieces listed in increasing time and the last ending at t̃. Without an
/// `id` column subjects are numbered 1, 2, ... in file order.
NamedDataset parse_dataset(std::istream& main, std::istream* schedule = nullptr);
NamedDataset read_dataset(const std::string& path, const std::string& schedule_path = {});

/// True when every subject has a single covariate piece, so the flat file
/// carries x as constant columns.
bool has_constant_schedules(const Dataset& data);
std::string dataset_csv(const Dataset& data, const CovariateNames& names);
/// Long-format schedule; empty string when the schedules are constant.
std::string schedule_csv(const Dataset& data, const CovariateNames& names);

std::string read_file(const std::string& path);
/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::string& path, const std::string& content);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in);
std::map<std::string, std::string> read_key_values(const std::string& path);

/// Named designs `nc80-pc70`, `nc80-pc40`, `nc60-pc70`, `nc60-pc40`.
bool is_scenario_preset(const std::string& name);
Scenario scenario_preset(const std::string& name, std::size_t n, std::uint64_t seed);
/// Overrides fields of `base` from keys named like the Scenario members.
/// A `preset` key first resets the design. Unknown keys are rejected.
Scenario apply_scenario_keys(const std::map<std::string, std::string>& keys, Scenario base);
std::string scenario_key_values(const Scenario& scenario);
Json scenario_json(const Scenario& scenario);

Json solver_config_json(const SolverConfig& config);
Json summary_json(const FitSummary& summary);
Json fit_json(const FittedModel& fitted, const CovariateNames& names, const FitSummary& summary);

/// What `predict` needs from a saved fit.
struct SavedFit {
  BinGrid grid;
  ParamVector eta;
  Eigen::MatrixXd v;
  CovariateNames names;
};
SavedFit saved_fit_from_json(const Json& doc);

/// (t, ĥ₀, SE, CI_lo, CI_hi) at bin midpoints, plus the bin edges.
std::string baseline_csv(const FitSummary& summary);
std::string survival_csv(const std::vector<SurvivalPoint>& curve);
std::string latent_csv(const std::vector<LatentSubject>& latent);

Json report_json(const MetricReport& report);
/// One row per parameter with truth, ABIAS, MCSD, AASD, MSE, CP and the
/// scenario's realized fractions.
std::string report_csv(const MetricReport& report);

/// One row per replicate: status, estimates, SEs, hazard points and ISE.
std::string replicates_csv(const std::vector<ReplicateOutcome>& outcomes);

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, FNV-1a hex
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string version;
  std::map<std::string, double> timings;  // seconds
  std::string started_at;
};
Json manifest_json(const RunManifest& manifest);

/// Serialization used for every JSON output file.
std::string dump(const Json& doc);

}  // namespace mixcure::io
