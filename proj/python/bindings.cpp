#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ncs/config.hpp"
#include "ncs/errors.hpp"
#include "ncs/oracle.hpp"
#include "ncs/schedule_io.hpp"
#include "ncs/simulation.hpp"
#include "ncs/synthesis.hpp"

namespace py = pybind11;

namespace {

py::dict trace_dict(const ncs::SimTrace& t) {
  py::list steps;
  for (const auto& s : t.steps) {
    py::dict d;
    d["k"] = s.k;
    d["x"] = s.x;
    d["u"] = s.u;
    d["u_tilde"] = s.u_tilde;
    d["r"] = s.r;
    d["d"] = s.d;
    d["stage_cost"] = s.stage_cost;
    steps.append(d);
  }
  py::dict out;
  out["steps"] = steps;
  out["x_final"] = t.x_final;
  out["terminal_cost"] = t.terminal_cost;
  out["J"] = t.J;
  out["J_tilde"] = t.J_tilde;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gain synthesis, simulation and exhaustive checks for delayed networked control loops";

  py::register_exception<ncs::Error>(m, "NcsError", PyExc_RuntimeError);

  py::class_<ncs::DelayChain>(m, "DelayChain")
      .def(py::init<int, int, Eigen::MatrixXd, int>(), py::arg("lo"), py::arg("hi"), py::arg("step"),
           py::arg("cache_horizon") = 16)
      .def_property_readonly("lo", &ncs::DelayChain::lo)
      .def_property_readonly("hi", &ncs::DelayChain::hi)
      .def_property_readonly("step", &ncs::DelayChain::step)
      .def("n_step", py::overload_cast<int, int, int>(&ncs::DelayChain::n_step, py::const_), py::arg("from_value"),
           py::arg("to_value"), py::arg("steps"))
      .def("power", &ncs::DelayChain::power);

  py::class_<ncs::Config>(m, "Problem")
      .def_property_readonly("n", [](const ncs::Config& c) { return c.spec.plant.n(); })
      .def_property_readonly("m", [](const ncs::Config& c) { return c.spec.plant.m(); })
      .def_property_readonly("k0", [](const ncs::Config& c) { return c.spec.cost.k0; })
      .def_property_readonly("N", [](const ncs::Config& c) { return c.spec.cost.N; })
      .def_property_readonly("spec_hash", [](const ncs::Config& c) { return ncs::hash_hex(ncs::spec_hash(c.spec)); })
      .def_property_readonly("m_tilde", [](const ncs::Config& c) { return c.spec.layout().m_tilde; })
      .def_property_readonly("m_hat", [](const ncs::Config& c) { return c.spec.layout().m_hat; })
      .def_property_readonly("episodes", [](const ncs::Config& c) { return c.run.episodes; })
      .def_property_readonly("seed", [](const ncs::Config& c) { return c.run.seed; })
      .def("initial_extended_state", [](const ncs::Config& c) { return ncs::initial_extended_state(c.spec, c.init); });

  py::class_<ncs::GainSchedule>(m, "Schedule")
      .def_property_readonly("k0", &ncs::GainSchedule::k0)
      .def_property_readonly("N", &ncs::GainSchedule::N)
      .def_property_readonly("spec_hash", [](const ncs::GainSchedule& s) { return ncs::hash_hex(s.spec_hash()); })
      .def("value", &ncs::GainSchedule::value, py::arg("k"), py::arg("r"), py::arg("d"))
      .def("gain", &ncs::GainSchedule::gain, py::arg("k"), py::arg("r"), py::arg("d"))
      .def("max_condition", &ncs::GainSchedule::max_condition, py::arg("k"))
      .def("to_string", &ncs::schedule_to_string)
      .def("save", [](const ncs::GainSchedule& s, const std::string& path) { ncs::save_schedule(path, s); })
      .def("__eq__", &ncs::GainSchedule::operator==);

  m.def("load_config", &ncs::load_config, py::arg("path"));
  m.def("parse_config", &ncs::parse_config, py::arg("text"), py::arg("origin") = "<config>");
  m.def("schedule_from_string", &ncs::schedule_from_string, py::arg("text"));
  m.def(
      "synthesize", [](const ncs::Config& c) { return ncs::synthesize(c.spec); }, py::arg("problem"));
  m.def(
      "run_episode",
      [](const ncs::Config& c, const ncs::GainSchedule& s, std::uint64_t seed) {
        return trace_dict(ncs::run_episode(c.spec, s, c.init, seed));
      },
      py::arg("problem"), py::arg("schedule"), py::arg("seed"));
  m.def(
      "run_monte_carlo",
      [](const ncs::Config& c, const ncs::GainSchedule& s, int episodes, std::uint64_t seed) {
        ncs::MonteCarloSummary r;
        {
          py::gil_scoped_release release;
          r = ncs::run_monte_carlo(c.spec, s, c.init, episodes, seed);
        }
        py::dict d;
        d["mean_J"] = r.mean_J;
        d["mean_Jtilde"] = r.mean_J_tilde;
        d["stderr_J"] = r.stderr_J;
        d["stderr_Jtilde"] = r.stderr_J_tilde;
        d["v_k0"] = r.v_k0;
        d["episodes"] = r.episodes;
        d["seed"] = r.seed;
        return d;
      },
      py::arg("problem"), py::arg("schedule"), py::arg("episodes"), py::arg("seed"));
  m.def(
      "enumerate_expected_cost",
      [](const ncs::Config& c, const ncs::GainSchedule& s) { return ncs::enumerate_expected_cost(c.spec, s, c.init); },
      py::arg("problem"), py::arg("schedule"));
  m.def(
      "joint_open_loop_min",
      [](const ncs::Config& c) {
        const auto r = ncs::joint_open_loop_min(c.spec, c.init);
        return py::make_tuple(r.value, r.z);
      },
      py::arg("problem"));
  m.def(
      "verify",
      [](const ncs::Config& c, const std::string& level) {
        if (level != "quick" && level != "exhaustive") throw py::value_error("level must be 'quick' or 'exhaustive'");
        const auto report = ncs::verify(c.spec, c.init, c.run,
                                        level == "exhaustive" ? ncs::VerifyLevel::Exhaustive : ncs::VerifyLevel::Quick);
        py::list out;
        for (const auto& l : report.lines) {
          py::dict d;
          d["name"] = l.name;
          d["passed"] = l.passed;
          d["measured"] = l.measured;
          d["tolerance"] = l.tolerance;
          d["detail"] = l.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("problem"), py::arg("level") = "quick");
}
