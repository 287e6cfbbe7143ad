// mixcure command-line tool: fit, simulate, replicate, predict.

#include "mixcure/fit.hpp"
#include "mixcure/inference.hpp"
#include "mixcure/io.hpp"
#include "mixcure/replicate.hpp"
#include "mixcure/simgen.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mixcure;
using io::Json;

enum ExitCode { kOk = 0, kInputError = 2, kNonConvergence = 3, kInternal = 4 };

/// Raised when a fit or every replicate fails to converge.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int n_obs = 0;
  int m = 0;
  std::optional<double> omega;
  double mu_tol = 1e-8;
  double epsilon = 0.6;
  double zeta = 0.1;
  double xi = 0.1;
  int max_iter = 500;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::size_t reps = 100;
  std::size_t n = 200;
  std::string scenario = "nc80-pc70";
  std::string out_dir = ".";
};

struct FitArgs {
  std::string data;
  std::string schedule;
};

struct PredictArgs {
  std::string fit;
  std::string z, w, x;
  std::vector<std::string> x_pieces;
  std::string times;
  double t_max = 0.0;
  int points = 50;
  double extrapolation_cap = 0.0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string out_path(const Common& c, const std::string& name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

SolverConfig solver_config(const Common& c) {
  SolverConfig s;
  s.mu_tol = c.mu_tol;
  s.epsilon = c.epsilon;
  s.zeta = c.zeta;
  s.xi = c.xi;
  s.max_iter = c.max_iter;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return s;
}

FitOptions fit_options(const Common& c) {
  if (c.n_obs < 0 || c.m < 0) throw InputError("--n-obs and --m must be positive");
  if (c.omega && !(*c.omega >= 0.0)) throw InputError("--omega must be nonnegative");
  FitOptions o;
  o.n_obs_per_bin = c.n_obs;
  o.bins = c.m;
  o.omega = c.omega;
  o.solver = solver_config(c);
  return o;
}

Json common_json(const Common& c) {
  return Json{{"n_obs", c.n_obs},   {"m", c.m},           {"omega", c.omega ? Json(*c.omega) : Json(nullptr)},
              {"mu_tol", c.mu_tol}, {"epsilon", c.epsilon}, {"zeta", c.zeta},
              {"xi", c.xi},         {"max_iter", c.max_iter}, {"seed", c.seed},
              {"jobs", c.jobs},     {"reps", c.reps},     {"n", c.n},
              {"scenario", c.scenario}};
}

/// A preset name or a key = value file; `--n` and `--seed` apply first so a
/// file can still override them.
Scenario load_scenario(const Common& c, io::RunManifest& manifest) {
  if (io::is_scenario_preset(c.scenario)) return io::scenario_preset(c.scenario, c.n, c.seed);
  if (!std::filesystem::exists(c.scenario))
    throw InputError("--scenario: '" + c.scenario + "' is neither a preset nor a file");
  manifest.inputs.emplace_back(c.scenario, io::hex64(io::fnv1a64(io::read_file(c.scenario))));
  Scenario base = io::scenario_preset("nc80-pc70", c.n, c.seed);
  return io::apply_scenario_keys(io::read_key_values(c.scenario), base);
}

void write_outputs(const Common& c, io::RunManifest& manifest,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& [name, content] : files) manifest.outputs.push_back(name);
  for (const auto& [name, content] : files) io::atomic_write(out_path(c, name), content);
  io::atomic_write(out_path(c, "manifest.json"), io::dump(io::manifest_json(manifest)));
}

Eigen::VectorXd parse_list(const std::string& text, const char* what) {
  if (text.empty()) return Eigen::VectorXd();
  const auto cells = io::split_csv_line(text);
  Eigen::VectorXd out(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k) out(static_cast<Eigen::Index>(k)) = io::parse_number(cells[k], 0, what);
  return out;
}

int cmd_fit(const Common& c, const FitArgs& a, io::RunManifest manifest) {
  const auto t0 = Clock::now();
  const FitOptions options = fit_options(c);
  const io::NamedDataset named = io::read_dataset(a.data, a.schedule);
  if (named.data.size() == 0) throw InputError("data file has no records");
  manifest.inputs.emplace_back(a.data, io::hex64(io::fnv1a64(io::read_file(a.data))));
  if (!a.schedule.empty())
    manifest.inputs.emplace_back(a.schedule, io::hex64(io::fnv1a64(io::read_file(a.schedule))));
  manifest.timings["read"] = seconds_since(t0);

  const auto t1 = Clock::now();
  const FittedModel fitted = fit_model(named.data, options);
  manifest.timings["fit"] = seconds_since(t1);

  if (!fitted.fit.converged()) {
    Json diag{{"status", to_string(fitted.fit.status)},
              {"iterations", fitted.fit.iterations},
              {"mu", fitted.fit.mu},
              {"dual_residual", fitted.fit.dual_residual},
              {"omega", fitted.fit.omega},
              {"message", fitted.fit.message},
              {"smoothing_stop", fitted.trace.stop_reason},
              {"manifest", "manifest.json"}};
    write_outputs(c, manifest, {{"diagnostics.json", io::dump(diag)}});
    throw NonConvergence("solver did not converge: " + std::string(to_string(fitted.fit.status)));
  }
  const FitSummary summary = summarize(fitted.grid(), fitted.fit, fitted.covariance, named.names);
  const std::string table = format_summary(summary);
  write_outputs(c, manifest,
                {{"fit.json", io::dump(io::fit_json(fitted, named.names, summary))},
                 {"baseline.csv", io::baseline_csv(summary)},
                 {"summary.txt", table}});
  std::cout << table;
  std::cout << "bins " << fitted.grid().m() << ", omega " << fitted.fit.omega << ", iterations "
            << fitted.fit.iterations << "\n";
  if (!fitted.covariance.ok) std::cerr << "warning: " << fitted.covariance.diagnostic << "\n";
  return kOk;
}

int cmd_simulate(const Common& c, io::RunManifest manifest) {
  const auto t0 = Clock::now();
  const Scenario sc = load_scenario(c, manifest);
  manifest.seed = sc.seed;
  manifest.config["resolved_scenario"] = io::scenario_json(sc);
  const SimulatedData sim = simulate_dataset(sc);
  manifest.timings["simulate"] = seconds_since(t0);

  const CovariateNames names{{"z_1", "z_2"}, {"w_1", "w_2"}, {"x_1"}};
  std::vector<std::pair<std::string, std::string>> files{{"data.csv", io::dataset_csv(sim.data, names)}};
  const std::string schedule = io::schedule_csv(sim.data, names);
  if (!schedule.empty()) files.emplace_back("schedule.csv", schedule);
  files.emplace_back("latent.csv", io::latent_csv(sim.latent));
  files.emplace_back("scenario.txt", io::scenario_key_values(sc));
  write_outputs(c, manifest, files);

  std::size_t susceptible = 0;
  for (const auto& l : sim.latent) susceptible += l.susceptible;
  std::cout << "n " << sc.n << ", non-cured " << susceptible << ", right-censored "
            << sim.data.count(CensoringKind::Right) << ", events " << sim.data.count(CensoringKind::Event)
            << ", left " << sim.data.count(CensoringKind::Left) << ", interval "
            << sim.data.count(CensoringKind::Interval) << "\n";
  return kOk;
}

int cmd_replicate(const Common& c, io::RunManifest manifest) {
  if (c.reps < 2) throw InputError("--reps must be at least 2");
  const Scenario sc = load_scenario(c, manifest);
  manifest.seed = sc.seed;
  manifest.config["resolved_scenario"] = io::scenario_json(sc);
  FitOptions options = scenario_fit_options(sc, fit_options(c));
  if (c.n_obs > 0) options.n_obs_per_bin = c.n_obs;
  if (c.m > 0 && c.n_obs == 0) options.n_obs_per_bin = 0;

  const auto t0 = Clock::now();
  auto outcomes = run_replicates(sc, c.reps, options, c.jobs);
  manifest.timings["replicates"] = seconds_since(t0);
  const std::string per_rep = io::replicates_csv(outcomes);
  MetricReport report;
  try {
    report = aggregate(sc, std::move(outcomes));
  } catch (const std::runtime_error&) {
    write_outputs(c, manifest, {{"replicates.csv", per_rep}});
    throw NonConvergence("no replicate converged");
  }
  write_outputs(c, manifest,
                {{"report.json", io::dump(io::report_json(report))},
                 {"report.csv", io::report_csv(report)},
                 {"replicates.csv", per_rep}});
  std::printf("reps %zu, converged %zu, non-cured %.3f, pi_R %.3f, mean bins %.1f\n", report.reps,
              report.converged, report.mean_non_cured, report.mean_right_censored, report.mean_bins);
  std::printf("%-8s %8s %8s %8s %8s %8s %6s\n", "param", "truth", "ABIAS", "MCSD", "AASD", "MSE", "CP");
  auto line = [](const ParameterMetrics& m) {
    std::printf("%-8s %8.4f %8.4f %8.4f %8.4f %8.4f %6.3f\n", m.name.c_str(), m.truth, m.abias, m.mcsd, m.aasd,
                m.mse, m.cp);
  };
  for (const auto& m : report.parameters) line(m);
  for (const auto& m : report.hazard) line(m);
  std::printf("AISE %.4f\n", report.aise);
  return kOk;
}

int cmd_predict(const Common& c, const PredictArgs& a, io::RunManifest manifest) {
  const std::string text = io::read_file(a.fit);
  manifest.inputs.emplace_back(a.fit, io::hex64(io::fnv1a64(text)));
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("fit file is not valid JSON: ") + e.what());
  }
  const io::SavedFit saved = io::saved_fit_from_json(doc);
  const ParamLayout& lay = saved.eta.layout();

  CovariateProfile profile;
  profile.z = parse_list(a.z, "--z");
  profile.w = parse_list(a.w, "--w");
  if (!a.x_pieces.empty()) {
    profile.tv_values.resize(static_cast<Eigen::Index>(a.x_pieces.size()), lay.p);
    for (std::size_t k = 0; k < a.x_pieces.size(); ++k) {
      const auto colon = a.x_pieces[k].find(':');
      if (colon == std::string::npos) throw InputError("--x-piece expects END:v1,v2,...");
      profile.tv_times.push_back(io::parse_number(a.x_pieces[k].substr(0, colon), 0, "--x-piece"));
      const Eigen::VectorXd x = parse_list(a.x_pieces[k].substr(colon + 1), "--x-piece");
      if (x.size() != lay.p) throw InputError("--x-piece has the wrong number of values");
      profile.tv_values.row(static_cast<Eigen::Index>(k)) = x.transpose();
    }
  } else {
    profile.x_const = a.x.empty() ? Eigen::VectorXd::Zero(lay.p) : parse_list(a.x, "--x");
  }

  std::vector<double> times;
  if (!a.times.empty()) {
    const Eigen::VectorXd t = parse_list(a.times, "--times");
    times.assign(t.data(), t.data() + t.size());
  } else {
    if (a.points < 2) throw InputError("--points must be at least 2");
    const double hi = a.t_max > 0.0 ? a.t_max : saved.grid.upper();
    for (int k = 0; k < a.points; ++k) times.push_back(hi * k / (a.points - 1));
  }
  const auto curve = predict_survival(saved.grid, saved.eta, saved.v, profile, times, a.extrapolation_cap);
  const double horizon = *std::max_element(times.begin(), times.end());
  if (horizon > 0.0) {
    const double low = min_profile_hazard(saved.grid, saved.eta, profile, horizon);
    if (low < 0.0)
      std::cerr << "warning: the fitted hazard of this profile is negative (minimum " << low
                << "), so the curve is not monotone there\n";
  }
  write_outputs(c, manifest, {{"survival.csv", io::survival_csv(curve)}});
  std::cout << io::survival_csv(curve);
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool fitting, bool simulating) {
  sub->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  if (fitting) {
    sub->add_option("--n-obs", c.n_obs, "Observations per bin (default: round(n^(1/3)) bins)");
    sub->add_option("--m", c.m, "Number of bins")->excludes("--n-obs");
    sub->add_option("--omega", c.omega, "Fixed smoothing value; omit for automatic selection");
    sub->add_option("--mu-tol", c.mu_tol, "Duality-measure tolerance")->capture_default_str();
    sub->add_option("--epsilon", c.epsilon, "Backtracking ratio in (0, 1)")->capture_default_str();
    sub->add_option("--zeta", c.zeta, "Central-path neighbourhood in (0, 1)")->capture_default_str();
    sub->add_option("--xi", c.xi, "Centering parameter in (0, 1)")->capture_default_str();
    sub->add_option("--max-iter", c.max_iter, "Interior-point iteration limit")->capture_default_str();
  }
  if (simulating) {
    sub->add_option("--scenario", c.scenario, "Preset (nc80-pc70, nc80-pc40, nc60-pc70, nc60-pc40) or key=value file")
        ->capture_default_str();
    sub->add_option("--n", c.n, "Sample size")->capture_default_str();
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-cure additive hazards models for partly interval-censored data"};
  app.set_config("--config", "", "key = value file with flag defaults; command-line flags take precedence");
  app.set_version_flag("--version", io::library_version());
  app.require_subcommand(1);

  Common common;
  FitArgs fit_args;
  PredictArgs pred;

  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV dataset");
  fit->add_option("data", fit_args.data, "Data CSV (t_left,t_right,z_*,w_*[,x_*])")->required();
  fit->add_option("--schedule", fit_args.schedule, "Long-format time-varying covariates (id,time,x_*)");
  add_common(fit, common, true, false);

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset");
  add_common(sim, common, false, true);

  auto* rep = app.add_subcommand("replicate", "Simulate and fit replicates, report metrics");
  add_common(rep, common, true, true);
  rep->add_option("--reps", common.reps, "Replicate count")->capture_default_str();
  rep->add_option("--jobs", common.jobs, "Worker threads")->capture_default_str();

  auto* predict = app.add_subcommand("predict", "Population survival curve from a saved fit");
  predict->add_option("fit", pred.fit, "fit.json from the fit command")->required();
  predict->add_option("--z", pred.z, "Incidence covariates, comma separated");
  predict->add_option("--w", pred.w, "Baseline latency covariates, comma separated");
  predict->add_option("--x", pred.x, "Constant time-varying covariates, comma separated");
  predict->add_option("--x-piece", pred.x_pieces, "Covariate piece END:v1,v2 (repeatable, increasing END)")
      ->excludes("--x");
  predict->add_option("--times", pred.times, "Times, comma separated");
  predict->add_option("--t-max", pred.t_max, "Grid upper end (default: last bin edge)");
  predict->add_option("--points", pred.points, "Grid size")->capture_default_str();
  predict->add_option("--extrapolation-cap", pred.extrapolation_cap,
                      "Allowed relative extrapolation past the last bin edge")
      ->capture_default_str();
  add_common(predict, common, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  io::RunManifest manifest;
  manifest.version = io::library_version();
  manifest.started_at = utc_now();
  manifest.seed = common.seed;
  manifest.config = common_json(common);
  try {
    if (*fit) {
      manifest.command = "fit";
      return cmd_fit(common, fit_args, manifest);
    }
    if (*sim) {
      manifest.command = "simulate";
      return cmd_simulate(common, manifest);
    }
    if (*rep) {
      manifest.command = "replicate";
      return cmd_replicate(common, manifest);
    }
    manifest.command = "predict";
    return cmd_predict(common, pred, manifest);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
