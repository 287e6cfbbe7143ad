#include "mixcure/fit.hpp"
#include "mixcure/io.hpp"
#include "mixcure/model.hpp"
#include "mixcure/replicate.hpp"
#include "mixcure/simgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace py = pybind11;
using namespace mixcure;

namespace {

io::NamedDataset parse_text(const std::string& csv, const std::string& schedule) {
  std::istringstream main(csv);
  if (schedule.empty()) return io::parse_dataset(main);
  std::istringstream sched(schedule);
  return io::parse_dataset(main, &sched);
}

Scenario make_scenario(const std::string& preset, std::size_t n, std::uint64_t seed,
                       const std::map<std::string, std::string>& overrides) {
  if (!io::is_scenario_preset(preset)) throw InputError("unknown scenario preset '" + preset + "'");
  return io::apply_scenario_keys(overrides, io::scenario_preset(preset, n, seed));
}

Eigen::VectorXd column(const Dataset& data, bool right) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = right ? data.subjects[i].t_right : data.subjects[i].t_left;
  return out;
}

struct PyFit {
  FittedModel fitted;
  CovariateNames names;
  FitSummary summary;
};

}  // namespace

PYBIND11_MODULE(_mixcure, m) {
  m.doc() = "Mixture-cure additive hazards models for partly interval-censored data";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def("version", &io::library_version);
  m.def(
      "incidence_prob",
      [](const Eigen::VectorXd& gamma, const Eigen::VectorXd& z) {
        if (gamma.size() != z.size()) throw InputError("gamma and z differ in length");
        return incidence_prob(gamma, z);
      },
      py::arg("gamma"), py::arg("z"));
  m.def("solve_event_time", &solve_event_time, py::arg("c"), py::arg("beta1"), py::arg("t_star"), py::arg("tau"),
        py::arg("horizon") = 50.0);

  py::class_<io::NamedDataset>(m, "Dataset")
      .def_property_readonly("size", [](const io::NamedDataset& d) { return d.data.size(); })
      .def_property_readonly("t_left", [](const io::NamedDataset& d) { return column(d.data, false); })
      .def_property_readonly("t_right", [](const io::NamedDataset& d) { return column(d.data, true); })
      .def_property_readonly("dims",
                             [](const io::NamedDataset& d) {
                               return py::dict(py::arg("q") = d.data.q, py::arg("r") = d.data.r,
                                               py::arg("p") = d.data.p);
                             })
      .def("counts",
           [](const io::NamedDataset& d) {
             py::dict out;
             for (auto kind : {CensoringKind::Event, CensoringKind::Left, CensoringKind::Right,
                               CensoringKind::Interval})
               out[to_string(kind)] = d.data.count(kind);
             return out;
           })
      .def("to_csv", [](const io::NamedDataset& d) { return io::dataset_csv(d.data, d.names); })
      .def("schedule_csv", [](const io::NamedDataset& d) { return io::schedule_csv(d.data, d.names); })
      .def("__len__", [](const io::NamedDataset& d) { return d.data.size(); });

  m.def("read_dataset", &io::read_dataset, py::arg("path"), py::arg("schedule") = std::string());
  m.def("parse_dataset", &parse_text, py::arg("csv"), py::arg("schedule") = std::string());

  m.def(
      "simulate",
      [](const std::string& preset, std::size_t n, std::uint64_t seed,
         const std::map<std::string, std::string>& overrides) {
        const Scenario sc = make_scenario(preset, n, seed, overrides);
        SimulatedData sim = simulate_dataset(sc);
        io::NamedDataset named{std::move(sim.data), CovariateNames{{"z_1", "z_2"}, {"w_1", "w_2"}, {"x_1"}}};
        return py::make_tuple(named, io::latent_csv(sim.latent));
      },
      py::arg("preset") = "nc80-pc70", py::arg("n") = 200, py::arg("seed") = 1,
      py::arg("overrides") = std::map<std::string, std::string>());

  py::class_<PyFit>(m, "Fit")
      .def_property_readonly("converged", [](const PyFit& f) { return f.fitted.fit.converged(); })
      .def_property_readonly("status", [](const PyFit& f) { return std::string(to_string(f.fitted.fit.status)); })
      .def_property_readonly("omega", [](const PyFit& f) { return f.fitted.fit.omega; })
      .def_property_readonly("mu", [](const PyFit& f) { return f.fitted.fit.mu; })
      .def_property_readonly("objective", [](const PyFit& f) { return f.fitted.fit.objective; })
      .def_property_readonly("eta", [](const PyFit& f) { return f.fitted.fit.eta.values(); })
      .def_property_readonly("theta", [](const PyFit& f) { return Eigen::VectorXd(f.fitted.fit.eta.theta()); })
      .def_property_readonly("beta", [](const PyFit& f) { return Eigen::VectorXd(f.fitted.fit.eta.beta()); })
      .def_property_readonly("alpha", [](const PyFit& f) { return Eigen::VectorXd(f.fitted.fit.eta.alpha()); })
      .def_property_readonly("gamma", [](const PyFit& f) { return Eigen::VectorXd(f.fitted.fit.eta.gamma()); })
      .def_property_readonly("bin_edges", [](const PyFit& f) { return f.fitted.grid().edges(); })
      .def_property_readonly("covariance", [](const PyFit& f) { return f.fitted.covariance.v; })
      .def_property_readonly("covariance_ok", [](const PyFit& f) { return f.fitted.covariance.ok; })
      .def_property_readonly("standard_errors", [](const PyFit& f) { return f.fitted.covariance.standard_errors(); })
      .def_property_readonly("active_rows", [](const PyFit& f) { return f.fitted.covariance.active_rows; })
      .def("summary_table", [](const PyFit& f) { return format_summary(f.summary); })
      .def("to_json", [](const PyFit& f) { return io::dump(io::fit_json(f.fitted, f.names, f.summary)); })
      .def(
          "predict_survival",
          [](const PyFit& f, const Eigen::VectorXd& z, const Eigen::VectorXd& w, const Eigen::VectorXd& x,
             const std::vector<double>& times, double cap) {
            if (!f.fitted.covariance.ok) throw InputError("fit has no usable covariance");
            CovariateProfile profile{z, w, {}, {}, x};
            const auto curve =
                predict_survival(f.fitted.grid(), f.fitted.fit.eta, f.fitted.covariance.v, profile, times, cap);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(curve.size()), 5);
            for (std::size_t k = 0; k < curve.size(); ++k)
              out.row(static_cast<Eigen::Index>(k)) << curve[k].t, curve[k].survival, curve[k].se, curve[k].lower,
                  curve[k].upper;
            return out;
          },
          py::arg("z"), py::arg("w"), py::arg("x"), py::arg("times"), py::arg("extrapolation_cap") = 0.0);

  m.def(
      "fit",
      [](const io::NamedDataset& data, std::optional<double> omega, int m_bins, int n_obs, double mu_tol,
         double epsilon, double zeta, double xi, int max_iter) {
        FitOptions o;
        o.omega = omega;
        o.bins = m_bins;
        o.n_obs_per_bin = n_obs;
        o.solver.mu_tol = mu_tol;
        o.solver.epsilon = epsilon;
        o.solver.zeta = zeta;
        o.solver.xi = xi;
        o.solver.max_iter = max_iter;
        try {
          o.solver.validate();
        } catch (const std::invalid_argument& e) {
          throw InputError(e.what());
        }
        std::optional<FittedModel> fitted;
        {
          py::gil_scoped_release release;
          fitted.emplace(fit_model(data.data, o));
        }
        PyFit out{std::move(*fitted), data.names, {}};
        if (out.fitted.fit.converged())
          out.summary = summarize(out.fitted.grid(), out.fitted.fit, out.fitted.covariance, out.names);
        return out;
      },
      py::arg("data"), py::arg("omega") = py::none(), py::arg("m") = 0, py::arg("n_obs") = 0,
      py::arg("mu_tol") = 1e-8, py::arg("epsilon") = 0.6, py::arg("zeta") = 0.1, py::arg("xi") = 0.1,
      py::arg("max_iter") = 500);

  m.def(
      "replicate",
      [](const std::string& preset, std::size_t n, std::size_t reps, std::uint64_t seed, unsigned jobs,
         const std::map<std::string, std::string>& overrides) {
        if (reps < 2) throw InputError("reps must be at least 2");
        const Scenario sc = make_scenario(preset, n, seed, overrides);
        std::vector<ReplicateOutcome> outcomes;
        {
          py::gil_scoped_release release;
          outcomes = run_replicates(sc, reps, scenario_fit_options(sc), jobs);
        }
        const std::string per_rep = io::replicates_csv(outcomes);
        return py::make_tuple(io::dump(io::report_json(aggregate(sc, std::move(outcomes)))), per_rep);
      },
      py::arg("preset") = "nc80-pc70", py::arg("n") = 200, py::arg("reps") = 100, py::arg("seed") = 1,
      py::arg("jobs") = 1, py::arg("overrides") = std::map<std::string, std::string>());
}
