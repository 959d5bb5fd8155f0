#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "t3i/calibration.hpp"
#include "t3i/commands.hpp"
#include "t3i/errors.hpp"
#include "t3i/oracle.hpp"
#include "t3i/phasespace.hpp"
#include "t3i/propagator.hpp"
#include "t3i/seqfile.hpp"
#include "t3i/sequence.hpp"

namespace py = pybind11;
using namespace t3i;

PYBIND11_MODULE(_core, m) {
  m.doc() = "T^3 atom interferometer engines";

  static py::exception<DomainError> domain_error(m, "DomainError", PyExc_RuntimeError);
  static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    }
  });

  py::class_<PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<double, double, double>(), py::arg("hbar"), py::arg("mu_B"), py::arg("g_std") = 9.81)
      .def_static("codata", &PhysicalConstants::codata)
      .def_static("natural", &PhysicalConstants::natural)
      .def_readwrite("hbar", &PhysicalConstants::hbar)
      .def_readwrite("mu_B", &PhysicalConstants::mu_B)
      .def_readwrite("g_std", &PhysicalConstants::g_std);

  py::class_<GaussianPacket>(m, "GaussianPacket")
      .def(py::init([](double center, double velocity, double width, double time) {
             GaussianPacket g;
             g.center = center;
             g.velocity = velocity;
             g.width = width;
             g.time = time;
             return g;
           }),
           py::arg("center") = 0.0, py::arg("velocity") = 0.0, py::arg("width") = 1.0, py::arg("time") = 0.0)
      .def_readwrite("center", &GaussianPacket::center)
      .def_readwrite("velocity", &GaussianPacket::velocity)
      .def_readwrite("width", &GaussianPacket::width)
      .def_readwrite("time", &GaussianPacket::time);

  py::class_<PulseEvent>(m, "PulseEvent")
      .def(py::init<double, double, double>(), py::arg("time"), py::arg("area"), py::arg("laser_phase") = 0.0)
      .def_readwrite("time", &PulseEvent::time)
      .def_readwrite("area", &PulseEvent::area)
      .def_readwrite("laser_phase", &PulseEvent::laser_phase);

  py::class_<InterferometerSequence>(m, "InterferometerSequence")
      .def(py::init([](std::vector<PulseEvent> pulses, double a1, double a2, double mass) {
             InterferometerSequence s{std::move(pulses), a1, a2, mass};
             s.validate();
             return s;
           }),
           py::arg("pulses"), py::arg("a1"), py::arg("a2"), py::arg("mass") = 1.0)
      .def_static("canonical", &InterferometerSequence::canonical, py::arg("T"), py::arg("a1"), py::arg("a2"),
                  py::arg("mass"), py::arg("t0") = 0.0, py::arg("laser_phases") = std::array<double, 4>{})
      .def_readwrite("pulses", &InterferometerSequence::pulses)
      .def_readwrite("a1", &InterferometerSequence::a1)
      .def_readwrite("a2", &InterferometerSequence::a2)
      .def_readwrite("mass", &InterferometerSequence::mass)
      .def("is_canonical", &InterferometerSequence::is_canonical, py::arg("rel_tol") = 1e-12);

  py::class_<BranchResult>(m, "BranchResult")
      .def_readonly("interferometer_phase", &BranchResult::interferometer_phase)
      .def_readonly("laser_phase_total", &BranchResult::laser_phase_total)
      .def_readonly("contrast", &BranchResult::contrast)
      .def_readonly("closed", &BranchResult::closed)
      .def_readonly("residual_Z", &BranchResult::residual_Z)
      .def_readonly("residual_P", &BranchResult::residual_P);

  m.def("interferometer_phase", &interferometer_phase, py::arg("seq"),
        py::arg("consts") = PhysicalConstants::codata(), py::arg("packet") = std::nullopt);
  m.def("phase_shift", py::overload_cast<const InterferometerSequence&, const PhysicalConstants&>(&phase_shift),
        py::arg("seq"), py::arg("consts") = PhysicalConstants::codata());
  m.def("gaussian_contrast", &gaussian_contrast, py::arg("seq"), py::arg("packet"),
        py::arg("consts") = PhysicalConstants::codata());
  m.def(
      "total_laser_phase", [](std::vector<double> phases) { return total_laser_phase(phases); },
      py::arg("phases"));
  m.def(
      "solve_closure",
      [](double a1, double a2, double t10) {
        const auto c = solve_closure(a1, a2, t10);
        return py::make_tuple(c.t21, c.t32);
      },
      py::arg("a1"), py::arg("a2"), py::arg("t10"));

  m.def("alpha_factor", &alpha_factor, py::arg("tau"));
  m.def(
      "alpha_curve",
      [](double lo, double hi, int n) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : alpha_curve(lo, hi, n)) out.emplace_back(s.tau, s.alpha);
        return out;
      },
      py::arg("tau_min"), py::arg("tau_max"), py::arg("n_points"));

  m.def(
      "run_sequence_numeric",
      [](const InterferometerSequence& seq, const GaussianPacket& packet, const PhysicalConstants& consts,
         std::size_t min_points) {
        OracleOptions o;
        o.min_points = min_points;
        const auto r = run_sequence_numeric(seq, packet, consts, o);
        py::dict d;
        d["P_g1"] = r.P_g1;
        d["P_g2"] = r.P_g2;
        d["contrast"] = r.contrast;
        d["phase"] = r.phase;
        d["norm_drift"] = r.norm_drift;
        d["grid_points"] = r.grid.n;
        d["steps"] = r.steps;
        return d;
      },
      py::arg("seq"), py::arg("packet"), py::arg("consts") = PhysicalConstants::codata(),
      py::arg("min_points") = 4096);
  m.def(
      "fringe_scan_numeric",
      [](const InterferometerSequence& seq, const GaussianPacket& packet, std::vector<double> laser_totals,
         const PhysicalConstants& consts) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& r : fringe_scan_numeric(seq, packet, laser_totals, consts))
          out.emplace_back(r.laser_phase, r.P_g1, r.P_g2);
        return out;
      },
      py::arg("seq"), py::arg("packet"), py::arg("laser_totals"), py::arg("consts") = PhysicalConstants::codata());
  m.def(
      "extract_phase_from_fringe",
      [](std::vector<double> x, std::vector<double> y) {
        const auto f = extract_phase_from_fringe(x, y);
        py::dict d;
        d["phase"] = f.phase;
        d["visibility"] = f.visibility;
        d["offset"] = f.offset;
        d["amplitude"] = f.amplitude;
        d["rms_residual"] = f.rms_residual;
        d["degenerate"] = f.degenerate;
        return d;
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "fit_gradient",
      [](std::vector<double> z, std::vector<double> B) {
        if (z.size() != B.size()) throw std::invalid_argument("z and B must have the same length");
        std::vector<FieldMapPoint> pts;
        for (std::size_t i = 0; i < z.size(); ++i) pts.push_back({z[i], B[i], std::nullopt});
        const auto f = fit_gradient(pts);
        py::dict d;
        d["B0"] = f.B0;
        d["gradient"] = f.gradient;
        d["B0_stderr"] = f.B0_stderr;
        d["gradient_stderr"] = f.gradient_stderr;
        d["residuals"] = f.residuals;
        return d;
      },
      py::arg("z"), py::arg("B"));
  m.def(
      "plus_two_field_from_detuning",
      [](double detuning) { return field_from_detuning(RamanTransition::plus_two(), detuning); },
      py::arg("detuning"), "Field (T) of the +2 line at a detuning in rad/s.");

  py::class_<SequenceFile>(m, "SequenceFile")
      .def("sequence", &SequenceFile::sequence)
      .def("constants", &SequenceFile::constants)
      .def("initial_packet", &SequenceFile::initial_packet)
      .def_readonly("natural_units", &SequenceFile::natural_units)
      .def("__eq__", [](const SequenceFile& a, const SequenceFile& b) { return a == b; })
      .def("__str__", &format_sequence_file);
  m.def("parse_sequence_file", [](const std::string& text) { return parse_sequence_file(text); }, py::arg("text"));
  m.def(
      "run_phase",
      [](const SequenceFile& file, std::vector<std::string> engines) {
        PhaseOptions o;
        o.engines.clear();
        for (const auto& e : engines) o.engines.push_back(parse_engine(e));
        py::list out;
        for (const auto& r : cmd_phase(file, o).engines) {
          py::dict d;
          d["engine"] = engine_name(r.engine);
          d["phi_i"] = r.phi_i;
          d["phi_L"] = r.phi_L;
          d["contrast"] = r.contrast;
          d["closed"] = r.closed;
          out.append(d);
        }
        return out;
      },
      py::arg("file"), py::arg("engines") = std::vector<std::string>{"operator"});
}
