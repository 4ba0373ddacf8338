#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "oscsync/analysis.hpp"
#include "oscsync/dynamics.hpp"
#include "oscsync/error.hpp"
#include "oscsync/graph.hpp"
#include "oscsync/icas.hpp"
#include "oscsync/nodac.hpp"
#include "oscsync/report.hpp"
#include "oscsync/scenario.hpp"
#include "oscsync/verify.hpp"

namespace py = pybind11;
using namespace oscsync;

namespace {

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  for (const auto& [k, v] : m.entries()) {
    const auto num = m.number(k);
    if (num) d[py::str(k)] = *num;
    else d[py::str(k)] = v;
  }
  return d;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = Vector(Eigen::Map<const Vector>(t.times.data(), static_cast<Eigen::Index>(t.times.size())));
  d["step"] = t.step;
  d["theta"] = t.theta;
  d["theta_dot"] = t.theta_dot;
  if (t.has_vartheta()) d["vartheta"] = t.vartheta;
  return d;
}

Trajectory trajectory_from(const Vector& times, const Matrix& theta) {
  if (times.size() != theta.rows()) throw InvalidArgument("times and theta rows differ");
  Trajectory t;
  t.times.assign(times.data(), times.data() + times.size());
  t.step = times.size() > 1 ? times(1) - times(0) : 0.0;
  t.theta = theta;
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coupled-oscillator synchronization: networks, protocols, analysis and pilot-tone simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DisconnectedNetwork>(m, "DisconnectedNetwork", base.ptr());
  py::register_exception<Divergence>(m, "Divergence", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Network>(m, "Network")
      .def(py::init<Matrix>(), py::arg("weights"))
      .def_property_readonly("size", &Network::size)
      .def_property_readonly("weights", &Network::weights)
      .def("in_neighbors", &Network::in_neighbors)
      .def("edge_count", &Network::edge_count)
      .def("pattern", &Network::pattern)
      .def("scaled", &Network::scaled);
  m.def("build_network", &build_network, py::arg("neighbor_lists"), py::arg("weight") = 1.0,
        "Network from 0-based in-neighbor lists");
  m.def("complete_network", &complete_network, py::arg("n"), py::arg("weight") = 1.0);
  m.def("is_connected", &is_connected);
  m.def("is_balanced", &is_balanced, py::arg("network"), py::arg("tol") = 1e-12);

  py::class_<SpectralData>(m, "SpectralData")
      .def_readonly("laplacian", &SpectralData::laplacian)
      .def_readonly("gamma", &SpectralData::gamma)
      .def_readonly("lambda2", &SpectralData::lambda2)
      .def_readonly("lambda2_imag", &SpectralData::lambda2_imag)
      .def_readonly("lambda2_hat", &SpectralData::lambda2_hat)
      .def_readonly("projection", &SpectralData::projection)
      .def_readonly("balanced", &SpectralData::balanced);
  m.def("spectral", &spectral);

  py::class_<IncidenceData>(m, "IncidenceData")
      .def_readonly("incidence", &IncidenceData::incidence)
      .def_readonly("incoming", &IncidenceData::incoming)
      .def_readonly("edge_weights", &IncidenceData::edge_weights);
  m.def("incidence", &incidence, py::arg("network"), py::arg("coupling") = 1.0);

  m.def("wrap_phase", py::vectorize(&wrap_phase));
  m.def(
      "order_parameter",
      [](const Vector& theta) {
        const OrderParameter op = order_parameter(theta);
        return py::make_tuple(op.r, op.psi ? py::cast(*op.psi) : py::none());
      },
      "Returns (r, psi); psi is None when r vanishes");
  m.def(
      "fit_consensus",
      [](const Vector& times, const Matrix& theta, double start, double end) {
        const ConsensusLine line = fit_consensus(trajectory_from(times, theta), start, end);
        return py::make_tuple(line.slope, line.intercept);
      },
      py::arg("times"), py::arg("theta"), py::arg("start"), py::arg("end"), "Returns (slope, intercept)");
  m.def("consensus_frequency", &consensus_frequency);
  m.def(
      "bound_arbitrary",
      [](const Vector& omega, const Network& net, bool weighted) {
        return bound_arbitrary(omega, spectral(net), weighted ? OmegaBar::gamma_weighted : OmegaBar::arithmetic_mean)
            .value;
      },
      py::arg("omega"), py::arg("network"), py::arg("gamma_weighted") = true);
  m.def(
      "bound_alltoall", [](const Vector& omega, const Network& net) { return bound_alltoall(omega, spectral(net)).value; },
      py::arg("omega"), py::arg("network"));
  m.def(
      "residual_gamma",
      [](const Vector& theta, const Network& net, double coupling) {
        const double k_over_n = coupling / static_cast<double>(net.size());
        return residual_gamma(theta, incidence(net, k_over_n), spectral(net).gamma);
      },
      py::arg("theta"), py::arg("network"), py::arg("coupling"));
  m.def("agreement_transform", &agreement_transform);

  m.def(
      "integrate",
      [](const std::string& kind, const Vector& omega, const Vector& phi0, const Network& net, double coupling,
         double step, double horizon) {
        SimulationSetup setup{OscillatorBank(omega, phi0), net,
                              ProtocolSpec{parse_protocol_kind(kind), coupling, {}, {}}, step, horizon, std::nullopt};
        return trajectory_dict(integrate(setup));
      },
      py::arg("kind"), py::arg("omega"), py::arg("phi0"), py::arg("network"), py::arg("coupling") = 1.0,
      py::arg("step") = 0.01, py::arg("horizon") = 5.0,
      "kind: static_consensus, dynamic_consensus, kuramoto or extended_kuramoto");

  py::class_<NodacState>(m, "NodacState")
      .def_readonly("stages", &NodacState::stages)
      .def_readonly("step", &NodacState::step)
      .def("output", &NodacState::output);
  py::class_<Nodac>(m, "Nodac")
      .def(py::init<Network, std::size_t>(), py::arg("network"), py::arg("order"))
      .def("initial_state", &Nodac::initial_state)
      .def("step", &Nodac::step);
  m.def("nth_difference", [](const std::vector<double>& h, std::size_t order) { return nth_difference(h, order); });

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_static("parse", &parse_scenario, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_scenario(path); }, py::arg("path"))
      .def_readwrite("step", &ScenarioConfig::step)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_property_readonly("network", &ScenarioConfig::network)
      .def_property_readonly("natural_freq", [](const ScenarioConfig& c) { return c.bank.natural_freq; })
      .def_property_readonly("initial_phase", [](const ScenarioConfig& c) { return c.bank.initial_phase; })
      .def_property_readonly("has_icas", [](const ScenarioConfig& c) { return c.icas.has_value(); });

  m.def(
      "simulate",
      [](const ScenarioConfig& cfg) {
        const SimulationReport rep = simulate(cfg);
        std::ostringstream csv;
        write_trajectory_csv(csv, rep.trajectory);
        py::dict d;
        d["metrics"] = metrics_dict(rep.metrics);
        d["trajectory"] = trajectory_dict(rep.trajectory);
        d["csv"] = csv.str();
        return d;
      },
      py::arg("scenario"));
  m.def("bounds", [](const ScenarioConfig& cfg) { return metrics_dict(bounds_report(cfg)); }, py::arg("scenario"));
  m.def(
      "run_icas",
      [](const ScenarioConfig& cfg) {
        const icas::Result r = icas::run(cfg.icas_scenario());
        return metrics_dict(icas_report(r));
      },
      py::arg("scenario"));
  m.def(
      "verify",
      [](const ScenarioConfig& reference, std::uint64_t seed) {
        py::list out;
        for (const auto& r : run_verification(VerifyOptions{reference, seed})) {
          py::dict d;
          d["id"] = r.id;
          d["title"] = r.title;
          d["passed"] = r.passed;
          d["detail"] = r.detail;
          d["seconds"] = r.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("reference"), py::arg("seed") = 2024);
}
