#include "mixcure/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace mixcure::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Reads non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    out.emplace_back(no, line);
  }
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out += ',';
    out += cells[k];
  }
  out += '\n';
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// JSON has no infinities or NaNs; they are written as null and read back as NaN.
double json_number(const Json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json metrics_json(const ParameterMetrics& m) {
  return Json{{"name", m.name}, {"truth", m.truth}, {"abias", m.abias}, {"mcsd", m.mcsd},
              {"aasd", m.aasd}, {"mse", m.mse},     {"cp", m.cp},       {"count", m.count}};
}

}  // namespace

const char* library_version() { return MIXCURE_VERSION; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(std::string_view token, std::size_t line, std::string_view column) {
  const std::string t = trim(token);
  std::string lower = t;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "inf" || lower == "+inf" || lower == "infinity") return kInf;
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(value))
    throw InputError(line_error(line, "bad number '" + t + "' in column " + std::string(column)));
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

NamedDataset parse_dataset(std::istream& main, std::istream* schedule) {
  const auto lines = read_lines(main);
  if (lines.empty()) throw InputError("data file is empty");
  const auto header = split_csv_line(lines.front().second);

  int col_left = -1, col_right = -1, col_id = -1;
  std::vector<int> col_z, col_w, col_x;
  NamedDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    const int ci = static_cast<int>(c);
    if (h == "t_left") col_left = ci;
    else if (h == "t_right") col_right = ci;
    else if (h == "id") col_id = ci;
    else if (starts_with(h, "z_")) { col_z.push_back(ci); out.names.z.push_back(h); }
    else if (starts_with(h, "w_")) { col_w.push_back(ci); out.names.w.push_back(h); }
    else if (starts_with(h, "x_")) { col_x.push_back(ci); out.names.x.push_back(h); }
    else throw InputError(line_error(lines.front().first, "unrecognized column '" + h + "'"));
  }
  if (col_left < 0 || col_right < 0) throw InputError("header must contain t_left and t_right");
  if (schedule && !col_x.empty()) throw InputError("x_* columns and a schedule file are mutually exclusive");

  std::vector<RawRecord> records;
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> id_index;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [no, text] = lines[k];
    const auto cells = split_csv_line(text);
    if (cells.size() != header.size())
      throw InputError(line_error(no, "expected " + std::to_string(header.size()) + " fields, found " +
                                          std::to_string(cells.size())));
    RawRecord rec;
    rec.t_left = parse_number(cells[col_left], no, "t_left");
    rec.t_right = parse_number(cells[col_right], no, "t_right");
    rec.z.resize(static_cast<Eigen::Index>(col_z.size()));
    rec.w.resize(static_cast<Eigen::Index>(col_w.size()));
    rec.x_const.resize(static_cast<Eigen::Index>(col_x.size()));
    for (std::size_t j = 0; j < col_z.size(); ++j) rec.z(j) = parse_number(cells[col_z[j]], no, header[col_z[j]]);
    for (std::size_t j = 0; j < col_w.size(); ++j) rec.w(j) = parse_number(cells[col_w[j]], no, header[col_w[j]]);
    for (std::size_t j = 0; j < col_x.size(); ++j)
      rec.x_const(j) = parse_number(cells[col_x[j]], no, header[col_x[j]]);
    const std::string id = col_id >= 0 ? cells[col_id] : std::to_string(k);
    if (!id_index.emplace(id, records.size()).second) throw InputError(line_error(no, "duplicate id '" + id + "'"));
    ids.push_back(id);
    try {
      classify(rec.t_left, rec.t_right);
    } catch (const InputError& e) {
      throw InputError(line_error(no, e.what()));
    }
    records.push_back(std::move(rec));
  }

  if (schedule) {
    const auto tv_lines = read_lines(*schedule);
    if (tv_lines.empty()) throw InputError("schedule file is empty");
    const auto tv_header = split_csv_line(tv_lines.front().second);
    if (tv_header.size() < 2 || tv_header[0] != "id" || tv_header[1] != "time")
      throw InputError("schedule header must start with id,time");
    for (std::size_t c = 2; c < tv_header.size(); ++c) {
      if (!starts_with(tv_header[c], "x_"))
        throw InputError("schedule column '" + tv_header[c] + "' must start with x_");
      out.names.x.push_back(tv_header[c]);
    }
    const Eigen::Index p = static_cast<Eigen::Index>(tv_header.size()) - 2;
    std::vector<std::vector<std::pair<double, Eigen::VectorXd>>> pieces(records.size());
    for (std::size_t k = 1; k < tv_lines.size(); ++k) {
      const auto& [no, text] = tv_lines[k];
      const auto cells = split_csv_line(text);
      if (cells.size() != tv_header.size()) throw InputError(line_error(no, "schedule field count mismatch"));
      const auto it = id_index.find(cells[0]);
      if (it == id_index.end()) throw InputError(line_error(no, "schedule id '" + cells[0] + "' not in data file"));
      Eigen::VectorXd x(p);
      for (Eigen::Index j = 0; j < p; ++j) x(j) = parse_number(cells[2 + j], no, tv_header[2 + j]);
      pieces[it->second].emplace_back(parse_number(cells[1], no, "time"), std::move(x));
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (pieces[i].empty()) throw InputError("subject '" + ids[i] + "' has no schedule rows", i);
      RawRecord& rec = records[i];
      rec.tv_values.resize(static_cast<Eigen::Index>(pieces[i].size()), p);
      for (std::size_t a = 0; a < pieces[i].size(); ++a) {
        rec.tv_times.push_back(pieces[i][a].first);
        rec.tv_values.row(static_cast<Eigen::Index>(a)) = pieces[i][a].second.transpose();
      }
    }
  }
  out.data = validate_dataset(records);
  return out;
}

NamedDataset read_dataset(const std::string& path, const std::string& schedule_path) {
  std::ifstream main(path);
  if (!main) throw InputError("cannot open data file '" + path + "'");
  if (schedule_path.empty()) return parse_dataset(main);
  std::ifstream tv(schedule_path);
  if (!tv) throw InputError("cannot open schedule file '" + schedule_path + "'");
  return parse_dataset(main, &tv);
}

bool has_constant_schedules(const Dataset& data) {
  return std::all_of(data.subjects.begin(), data.subjects.end(), [](const Subject& s) { return s.n_pieces() == 1; });
}

std::string dataset_csv(const Dataset& data, const CovariateNames& names) {
  const bool flat = has_constant_schedules(data);
  const CovariateNames def = default_names({0, data.p, data.r, data.q});
  auto name = [](const std::vector<std::string>& v, const std::vector<std::string>& d, Eigen::Index j) {
    return static_cast<std::size_t>(j) < v.size() ? v[j] : d[j];
  };
  std::vector<std::string> head{"id", "t_left", "t_right"};
  for (Eigen::Index j = 0; j < data.q; ++j) head.push_back(name(names.z, def.z, j));
  for (Eigen::Index j = 0; j < data.r; ++j) head.push_back(name(names.w, def.w, j));
  if (flat)
    for (Eigen::Index j = 0; j < data.p; ++j) head.push_back(name(names.x, def.x, j));
  std::string out = join(head);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data.subjects[i];
    std::vector<std::string> row{std::to_string(i + 1), format_number(s.t_left), format_number(s.t_right)};
    for (Eigen::Index j = 0; j < data.q; ++j) row.push_back(format_number(s.z(j)));
    for (Eigen::Index j = 0; j < data.r; ++j) row.push_back(format_number(s.w(j)));
    if (flat)
      for (Eigen::Index j = 0; j < data.p; ++j) row.push_back(format_number(s.tv_values(0, j)));
    out += join(row);
  }
  return out;
}

std::string schedule_csv(const Dataset& data, const CovariateNames& names) {
  if (has_constant_schedules(data)) return {};
  const CovariateNames def = default_names({0, data.p, data.r, data.q});
  std::vector<std::string> head{"id", "time"};
  for (Eigen::Index j = 0; j < data.p; ++j)
    head.push_back(static_cast<std::size_t>(j) < names.x.size() ? names.x[j] : def.x[j]);
  std::string out = join(head);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data.subjects[i];
    for (std::size_t a = 0; a < s.n_pieces(); ++a) {
      std::vector<std::string> row{std::to_string(i + 1), format_number(s.tv_times[a])};
      for (Eigen::Index j = 0; j < data.p; ++j) row.push_back(format_number(s.tv_values(static_cast<Eigen::Index>(a), j)));
      out += join(row);
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename into '" + path + "': " + ec.message());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InputError(line_error(no, "expected key = value"));
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw InputError(line_error(no, "empty key"));
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_key_values(in);
}

namespace {

struct PresetSpec {
  const char* name;
  double non_cured;
  double censor;
};
constexpr PresetSpec kPresets[] = {
    {"nc80-pc70", 0.8, 0.7}, {"nc80-pc40", 0.8, 0.4}, {"nc60-pc70", 0.6, 0.7}, {"nc60-pc40", 0.6, 0.4}};

const PresetSpec* find_preset(const std::string& name) {
  for (const auto& p : kPresets)
    if (name == p.name) return &p;
  return nullptr;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_number(value, 0, key);
  } catch (const InputError&) {
    throw InputError("scenario key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw InputError("scenario key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError("scenario key '" + key + "': expected true or false");
}

}  // namespace

bool is_scenario_preset(const std::string& name) { return find_preset(name) != nullptr; }

Scenario scenario_preset(const std::string& name, std::size_t n, std::uint64_t seed) {
  const PresetSpec* p = find_preset(name);
  if (!p) throw InputError("unknown scenario preset '" + name + "'");
  return Scenario::standard(n, p->non_cured, p->censor, seed);
}

Scenario apply_scenario_keys(const std::map<std::string, std::string>& keys, Scenario s) {
  if (auto it = keys.find("preset"); it != keys.end()) {
    std::size_t n = s.n;
    if (auto jt = keys.find("n"); jt != keys.end()) n = to_uint("n", jt->second);
    s = scenario_preset(it->second, n, s.seed);
  }
  for (const auto& [key, value] : keys) {
    if (key == "preset") continue;
    else if (key == "n") s.n = to_uint(key, value);
    else if (key == "d1") s.d1 = to_double(key, value);
    else if (key == "d2") s.d2 = to_double(key, value);
    else if (key == "censor_prop") s.censor_prop = to_double(key, value);
    else if (key == "gamma1") s.gamma1 = to_double(key, value);
    else if (key == "gamma2") s.gamma2 = to_double(key, value);
    else if (key == "alpha1") s.alpha1 = to_double(key, value);
    else if (key == "alpha2") s.alpha2 = to_double(key, value);
    else if (key == "beta1") s.beta1 = to_double(key, value);
    else if (key == "exp_param") s.exp_param = to_double(key, value);
    else if (key == "exp_is_mean") s.exp_is_mean = to_bool(key, value);
    else if (key == "interval_width_max") s.interval_width_max = to_double(key, value);
    else if (key == "cured_censor_max") s.cured_censor_max = to_double(key, value);
    else if (key == "switch_lo") s.switch_lo = to_double(key, value);
    else if (key == "switch_hi") s.switch_hi = to_double(key, value);
    else if (key == "w2_lo") s.w2_lo = to_double(key, value);
    else if (key == "w2_hi") s.w2_hi = to_double(key, value);
    else if (key == "seed") s.seed = to_uint(key, value);
    else if (key == "n_obs_per_bin") s.n_obs_per_bin = static_cast<int>(to_uint(key, value));
    else throw InputError("unknown scenario key '" + key + "'");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return s;
}

std::string scenario_key_values(const Scenario& s) {
  std::ostringstream os;
  os << "n = " << s.n << '\n'
     << "d1 = " << format_number(s.d1) << '\n'
     << "d2 = " << format_number(s.d2) << '\n'
     << "censor_prop = " << format_number(s.censor_prop) << '\n'
     << "gamma1 = " << format_number(s.gamma1) << '\n'
     << "gamma2 = " << format_number(s.gamma2) << '\n'
     << "alpha1 = " << format_number(s.alpha1) << '\n'
     << "alpha2 = " << format_number(s.alpha2) << '\n'
     << "beta1 = " << format_number(s.beta1) << '\n'
     << "exp_param = " << format_number(s.exp_param) << '\n'
     << "exp_is_mean = " << (s.exp_is_mean ? "true" : "false") << '\n'
     << "interval_width_max = " << format_number(s.interval_width_max) << '\n'
     << "cured_censor_max = " << format_number(s.cured_censor_max) << '\n'
     << "switch_lo = " << format_number(s.switch_lo) << '\n'
     << "switch_hi = " << format_number(s.switch_hi) << '\n'
     << "w2_lo = " << format_number(s.w2_lo) << '\n'
     << "w2_hi = " << format_number(s.w2_hi) << '\n'
     << "seed = " << s.seed << '\n'
     << "n_obs_per_bin = " << s.n_obs_per_bin << '\n';
  return os.str();
}

Json scenario_json(const Scenario& s) {
  return Json{{"n", s.n},
              {"d1", s.d1},
              {"d2", s.d2},
              {"censor_prop", s.censor_prop},
              {"gamma1", s.gamma1},
              {"gamma2", s.gamma2},
              {"alpha1", s.alpha1},
              {"alpha2", s.alpha2},
              {"beta1", s.beta1},
              {"exp_param", s.exp_param},
              {"exp_is_mean", s.exp_is_mean},
              {"interval_width_max", s.interval_width_max},
              {"cured_censor_max", s.cured_censor_max},
              {"switch_lo", s.switch_lo},
              {"switch_hi", s.switch_hi},
              {"w2_lo", s.w2_lo},
              {"w2_hi", s.w2_hi},
              {"seed", s.seed},
              {"n_obs_per_bin", s.n_obs_per_bin}};
}

Json solver_config_json(const SolverConfig& c) {
  return Json{{"epsilon", c.epsilon},   {"zeta", c.zeta},         {"xi", c.xi},
              {"mu_tol", c.mu_tol},     {"max_iter", c.max_iter}, {"kkt_tol", c.kkt_tol},
              {"max_backtracks", c.max_backtracks}};
}

Json summary_json(const FitSummary& summary) {
  auto rows = [](const std::vector<CoefficientRow>& in) {
    Json out = Json::array();
    for (const auto& r : in)
      out.push_back(Json{{"name", r.name},
                         {"index", r.index},
                         {"estimate", r.estimate},
                         {"se", r.se},
                         {"lower", r.lower},
                         {"upper", r.upper},
                         {"effect", r.effect},
                         {"effect_lower", r.effect_lower},
                         {"effect_upper", r.effect_upper},
                         {"p_one_sided", optional_json(r.p_one_sided)},
                         {"p_two_sided", optional_json(r.p_two_sided)},
                         {"boundary", r.boundary}});
    return out;
  };
  return Json{{"incidence_or", rows(summary.incidence)}, {"latency_hd", rows(summary.latency)}};
}

Json fit_json(const FittedModel& fitted, const CovariateNames& names, const FitSummary& summary) {
  const FitResult& fit = fitted.fit;
  const ParamLayout& lay = fit.eta.layout();
  Json trace = Json::array();
  for (const auto& r : fitted.trace.records)
    trace.push_back(Json{{"sigma2", r.sigma2},
                         {"omega", r.omega},
                         {"nu", r.nu},
                         {"df", r.df},
                         {"objective", r.objective},
                         {"log_marginal", r.log_marginal},
                         {"solver_iterations", r.solver_iterations}});
  Json active = Json::array();
  for (Eigen::Index b : fitted.covariance.active_rows) active.push_back(b);
  return Json{
      {"layout", Json{{"m", lay.m}, {"p", lay.p}, {"r", lay.r}, {"q", lay.q}}},
      {"names", Json{{"z", names.z}, {"w", names.w}, {"x", names.x}}},
      {"bin_edges", fitted.grid().edges()},
      {"eta", vector_json(fit.eta.values())},
      {"lambda", vector_json(fit.lambda)},
      {"slack", vector_json(fit.slack)},
      {"omega", fit.omega},
      {"covariance", matrix_json(fitted.covariance.v)},
      {"summary", summary_json(summary)},
      {"diagnostics",
       Json{{"status", to_string(fit.status)},
            {"converged", fit.converged()},
            {"iterations", fit.iterations},
            {"mu", fit.mu},
            {"dual_residual", fit.dual_residual},
            {"primal_residual", fit.primal_residual},
            {"gradient_norm", fit.gradient_norm},
            {"objective", fit.objective},
            {"loglik", fit.loglik},
            {"max_shift", fit.max_shift},
            {"message", fit.message},
            {"constraint_rows", fitted.constraints.rows()},
            {"nominal_constraint_rows", fitted.constraints.nominal_rows()},
            {"active_rows", active},
            {"null_space_dim", fitted.covariance.u_dim},
            {"covariance_ok", fitted.covariance.ok},
            {"covariance_diagnostic", fitted.covariance.diagnostic},
            {"smoothing_converged", fitted.trace.converged},
            {"smoothing_stop", fitted.trace.stop_reason},
            {"smoothing_trace", trace}}},
      {"manifest", "manifest.json"}};
}

SavedFit saved_fit_from_json(const Json& doc) {
  try {
    const Json& lay = doc.at("layout");
    ParamLayout layout{lay.at("m").get<Eigen::Index>(), lay.at("p").get<Eigen::Index>(),
                       lay.at("r").get<Eigen::Index>(), lay.at("q").get<Eigen::Index>()};
    SavedFit out;
    out.grid = BinGrid(doc.at("bin_edges").get<std::vector<double>>());
    if (out.grid.m() != layout.m) throw InputError("fit file: bin count does not match layout");
    const auto& eta = doc.at("eta");
    if (static_cast<Eigen::Index>(eta.size()) != layout.size()) throw InputError("fit file: eta length mismatch");
    Eigen::VectorXd values(layout.size());
    for (Eigen::Index k = 0; k < layout.size(); ++k) values(k) = json_number(eta[static_cast<std::size_t>(k)]);
    out.eta = ParamVector(layout, values);
    const auto& cov = doc.at("covariance");
    out.v = Eigen::MatrixXd::Constant(layout.size(), layout.size(), std::numeric_limits<double>::quiet_NaN());
    if (static_cast<Eigen::Index>(cov.size()) == layout.size())
      for (Eigen::Index i = 0; i < layout.size(); ++i)
        for (Eigen::Index j = 0; j < layout.size(); ++j)
          out.v(i, j) = json_number(cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    const Json& names = doc.at("names");
    out.names.z = names.at("z").get<std::vector<std::string>>();
    out.names.w = names.at("w").get<std::vector<std::string>>();
    out.names.x = names.at("x").get<std::vector<std::string>>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed fit file: ") + e.what());
  }
}

std::string baseline_csv(const FitSummary& summary) {
  std::string out = "t,hazard,se,ci_lo,ci_hi,bin_start,bin_end\n";
  for (const auto& r : summary.baseline)
    out += join({format_number(r.midpoint), format_number(r.hazard), format_number(r.se), format_number(r.lower),
                 format_number(r.upper), format_number(r.start), format_number(r.end)});
  return out;
}

std::string survival_csv(const std::vector<SurvivalPoint>& curve) {
  std::string out = "t,survival,se,lower,upper\n";
  for (const auto& p : curve)
    out += join({format_number(p.t), format_number(p.survival), format_number(p.se), format_number(p.lower),
                 format_number(p.upper)});
  return out;
}

std::string latent_csv(const std::vector<LatentSubject>& latent) {
  std::string out = "id,susceptible,event_time,tau,switch_time,linear\n";
  for (std::size_t i = 0; i < latent.size(); ++i) {
    const auto& l = latent[i];
    out += join({std::to_string(i + 1), l.susceptible ? "1" : "0", format_number(l.event_time), format_number(l.tau),
                 format_number(l.switch_time), format_number(l.linear)});
  }
  return out;
}

Json report_json(const MetricReport& report) {
  Json params = Json::array();
  for (const auto& m : report.parameters) params.push_back(metrics_json(m));
  Json hazard = Json::array();
  for (const auto& m : report.hazard) hazard.push_back(metrics_json(m));
  return Json{{"scenario", scenario_json(report.scenario)},
              {"reps", report.reps},
              {"converged", report.converged},
              {"exclusion_rate", report.exclusion_rate()},
              {"mean_non_cured", report.mean_non_cured},
              {"mean_right_censored", report.mean_right_censored},
              {"mean_bins", report.mean_bins},
              {"parameters", params},
              {"baseline_hazard", hazard},
              {"aise", report.aise},
              {"manifest", "manifest.json"}};
}

std::string report_csv(const MetricReport& report) {
  std::string out = "n,non_cured,pi_R,parameter,truth,abias,mcsd,aasd,mse,cp,count\n";
  auto row = [&](const ParameterMetrics& m) {
    out += join({std::to_string(report.scenario.n), format_number(report.mean_non_cured),
                 format_number(report.mean_right_censored), m.name, format_number(m.truth), format_number(m.abias),
                 format_number(m.mcsd), format_number(m.aasd), format_number(m.mse), format_number(m.cp),
                 std::to_string(m.count)});
  };
  for (const auto& m : report.parameters) row(m);
  for (const auto& m : report.hazard) row(m);
  out += join({std::to_string(report.scenario.n), format_number(report.mean_non_cured),
               format_number(report.mean_right_censored), "AISE", "", format_number(report.aise), "", "", "", "",
               std::to_string(report.converged)});
  return out;
}

std::string replicates_csv(const std::vector<ReplicateOutcome>& outcomes) {
  std::string out =
      "replicate,converged,failure,alpha1,alpha2,beta1,gamma1,gamma2,se_alpha1,se_alpha2,se_beta1,se_gamma1,se_gamma2,"
      "t1,t2,t3,h1,h2,h3,se_h1,se_h2,se_h3,ise,bins,omega,non_cured,pi_R\n";
  for (const auto& o : outcomes) {
    std::string failure = o.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    std::vector<std::string> row{std::to_string(o.index), o.converged ? "1" : "0", failure};
    for (std::size_t j = 0; j < 5; ++j) row.push_back(j < o.estimate.size() ? format_number(o.estimate[j]) : "nan");
    for (std::size_t j = 0; j < 5; ++j) row.push_back(j < o.se.size() ? format_number(o.se[j]) : "nan");
    for (double t : o.hazard_time) row.push_back(format_number(t));
    for (double h : o.hazard_estimate) row.push_back(format_number(h));
    for (double h : o.hazard_se) row.push_back(format_number(h));
    row.push_back(format_number(o.ise));
    row.push_back(std::to_string(o.bins));
    row.push_back(format_number(o.omega));
    row.push_back(format_number(o.non_cured_fraction));
    row.push_back(format_number(o.right_censored_fraction));
    out += join(row);
  }
  return out;
}

Json manifest_json(const RunManifest& m) {
  Json inputs = Json::array();
  for (const auto& [path, hash] : m.inputs) inputs.push_back(Json{{"path", path}, {"fnv1a64", hash}});
  Json timings = Json::object();
  for (const auto& [k, v] : m.timings) timings[k] = v;
  return Json{{"command", m.command}, {"version", m.version},   {"seed", m.seed},
              {"config", m.config},   {"inputs", inputs},       {"outputs", m.outputs},
              {"started_at", m.started_at}, {"timings_seconds", timings}};
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace mixcure::io
