#include "helpers.hpp"
#include "mixcure/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace mixcure;
using namespace mixcure::testing;

namespace {

io::NamedDataset parse(const std::string& main, const std::string& schedule = {}) {
  std::istringstream m(main), s(schedule);
  return io::parse_dataset(m, schedule.empty() ? nullptr : &s);
}

std::string error_of(const std::string& main, const std::string& schedule = {}) {
  try {
    parse(main, schedule);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("numbers round-trip at 17 significant digits") {
  for (double x : {0.1, 1.0 / 3.0, 2.5e-300, 123456789.123456789, -7.0}) CHECK(io::parse_number(io::format_number(x), 1, "c") == x);
  CHECK(io::format_number(kInf) == "inf");
  CHECK(io::parse_number("inf", 1, "c") == kInf);
  CHECK(io::parse_number(" Inf ", 1, "c") == kInf);
  CHECK_THROWS_AS(io::parse_number("1.5x", 4, "t_left"), InputError);
  CHECK_THROWS_AS(io::parse_number("nan", 4, "t_left"), InputError);
}

TEST_CASE("flat file parsing") {
  const auto d = parse("t_left,t_right,z_a,w_b,x_c\n1,1,0,2,3\n0,0.7,1,2,3\n2,inf,1,2,3\n0.5,1.5,0,1,0\n");
  CHECK(d.data.size() == 4);
  CHECK(d.names.z == std::vector<std::string>{"z_a"});
  CHECK(d.data.subjects[0].kind == CensoringKind::Event);
  CHECK(d.data.subjects[1].kind == CensoringKind::Left);
  CHECK(d.data.subjects[2].kind == CensoringKind::Right);
  CHECK(d.data.subjects[3].kind == CensoringKind::Interval);
  CHECK(d.data.subjects[0].tv_values(0, 0) == 3.0);
  CHECK(io::has_constant_schedules(d.data));
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(error_of("t_left,t_right\n1,1\n2,1\n").find("line 3") != std::string::npos);
  CHECK(error_of("t_left,t_right\n1,1\nfoo,1\n").find("line 3") != std::string::npos);
  CHECK(error_of("t_left,t_right\n1,1,3\n").find("line 2") != std::string::npos);
  CHECK(error_of("t_left,t_right,q_1\n1,1,3\n").find("unrecognized") != std::string::npos);
  CHECK(error_of("t_left\n1\n").find("t_right") != std::string::npos);
  CHECK(error_of("id,t_left,t_right\na,1,1\na,2,2\n").find("duplicate") != std::string::npos);
  CHECK(error_of("id,t_left,t_right\na,1,1\n", "id,time,x_1\nb,1,0\n").find("not in data") != std::string::npos);
  CHECK_FALSE(error_of("").empty());
}

TEST_CASE("dataset and schedule round-trip") {
  const std::string main = "id,t_left,t_right,z_1,w_1\ns1,1.5,1.5,1,0.25\ns2,0.4,2,0,0.5\ns3,1,inf,1,0.125\n";
  const std::string sched = "id,time,x_1\ns1,0.5,0\ns1,1.5,1\ns2,2,1\ns3,0.3,0\ns3,1,1\n";
  const auto d = parse(main, sched);
  CHECK(d.data.subjects[0].n_pieces() == 2);
  CHECK_FALSE(io::has_constant_schedules(d.data));
  const std::string flat = io::dataset_csv(d.data, d.names);
  const std::string tv = io::schedule_csv(d.data, d.names);
  const auto again = parse(flat, tv);
  REQUIRE(again.data.size() == d.data.size());
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const Subject &a = d.data.subjects[i], &b = again.data.subjects[i];
    CHECK(a.t_left == b.t_left);
    CHECK(a.t_right == b.t_right);
    CHECK(a.z == b.z);
    CHECK(a.w == b.w);
    CHECK(a.tv_times == b.tv_times);
    CHECK(a.tv_values == b.tv_values);
  }
  CHECK(io::dataset_csv(again.data, again.names) == flat);
  CHECK(io::schedule_csv(again.data, again.names) == tv);
}

TEST_CASE("simulated data round-trips exactly") {
  const SimulatedData sim = simulate_dataset(Scenario::standard(100, 0.8, 0.7, 77));
  const CovariateNames names{{"z_1", "z_2"}, {"w_1", "w_2"}, {"x_1"}};
  const auto again = parse(io::dataset_csv(sim.data, names), io::schedule_csv(sim.data, names));
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    CHECK(again.data.subjects[i].t_left == sim.data.subjects[i].t_left);
    CHECK(again.data.subjects[i].z == sim.data.subjects[i].z);
    CHECK(again.data.subjects[i].tv_times == sim.data.subjects[i].tv_times);
  }
}

TEST_CASE("FNV-1a reference values") {
  CHECK(io::hex64(io::fnv1a64("")) == "cbf29ce484222325");
  CHECK(io::hex64(io::fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK(io::hex64(io::fnv1a64("foobar")) == "85944171f73967e8");
}

TEST_CASE("key-value scenarios") {
  std::istringstream in("# design\npreset = nc60-pc40\nn = 300\nexp_param = 1.5 # rate\nseed=9\n");
  const Scenario sc = io::apply_scenario_keys(io::parse_key_values(in), io::scenario_preset("nc80-pc70", 200, 1));
  CHECK(sc.n == 300);
  CHECK(sc.d1 == 1.0);
  CHECK(sc.censor_prop == 0.4);
  CHECK(sc.exp_param == 1.5);
  CHECK(sc.seed == 9);
  std::istringstream bad("bogus = 1\n");
  CHECK_THROWS_AS(io::apply_scenario_keys(io::parse_key_values(bad), Scenario{}), InputError);
  std::istringstream noeq("n 5\n");
  CHECK_THROWS_AS(io::parse_key_values(noeq), InputError);
  CHECK(io::is_scenario_preset("nc80-pc40"));
  CHECK_FALSE(io::is_scenario_preset("nc90"));

  std::istringstream back(io::scenario_key_values(sc));
  const Scenario again = io::apply_scenario_keys(io::parse_key_values(back), Scenario{});
  CHECK(io::dump(io::scenario_json(again)) == io::dump(io::scenario_json(sc)));
}

TEST_CASE("fit document round-trips through the predict loader") {
  const Dataset d = exponential_dataset(80, 1.0, 5);
  FitOptions opt;
  opt.n_obs_per_bin = 10;
  opt.omega = 1.0;
  const FittedModel fm = fit_model(d, opt);
  REQUIRE(fm.fit.converged());
  const CovariateNames names = default_names(fm.fit.eta.layout());
  const FitSummary s = summarize(fm.grid(), fm.fit, fm.covariance, names);
  const std::string text = io::dump(io::fit_json(fm, names, s));
  CHECK(text == io::dump(io::fit_json(fm, names, s)));
  const io::SavedFit saved = io::saved_fit_from_json(io::Json::parse(text));
  CHECK(saved.eta.values() == fm.fit.eta.values());
  CHECK(saved.v == fm.covariance.v);
  CHECK(saved.grid.edges() == fm.grid().edges());
  CHECK_THROWS_AS(io::saved_fit_from_json(io::Json::parse("{}")), InputError);
}

TEST_CASE("atomic write leaves no temporary file") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mixcure_io_test";
  fs::remove_all(dir);
  const std::string target = (dir / "sub" / "out.txt").string();
  io::atomic_write(target, "hello\n");
  CHECK(io::read_file(target) == "hello\n");
  io::atomic_write(target, "again\n");
  CHECK(io::read_file(target) == "again\n");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) files += e.is_regular_file();
  CHECK(files == 1);
  fs::remove_all(dir);
}
