#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cspin/cli.hpp"
#include "cspin/config.hpp"
#include "cspin/error.hpp"
#include "cspin/figures.hpp"
#include "cspin/io.hpp"
#include "cspin/metastable.hpp"
#include "cspin/spectra.hpp"
#include "cspin/spin_core.hpp"
#include "cspin/sweep.hpp"

namespace py = pybind11;
using namespace cspin;

namespace {

py::dict husimi_dict(const HusimiGrid& g) {
  py::dict d;
  d["thetas"] = g.thetas;
  d["phis"] = g.phis;
  d["values"] = g.values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Periodically reset central spin model";

  static py::handle error = py::exception<Error>(m, "CspinError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string kind(to_string(e.kind()));
      py::set_error(error, (kind + ": " + e.what()).c_str());
    }
  });

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init([](int n, double w, double g) { return ChannelParams{n, w, g}; }), py::arg("n_spins"),
           py::arg("omega_tau"), py::arg("g_tau"))
      .def_readwrite("n_spins", &ChannelParams::n_spins)
      .def_readwrite("omega_tau", &ChannelParams::omega_tau)
      .def_readwrite("g_tau", &ChannelParams::g_tau)
      .def("__repr__", [](const ChannelParams& p) {
        std::ostringstream s;
        s << "ChannelParams(n_spins=" << p.n_spins << ", omega_tau=" << p.omega_tau << ", g_tau=" << p.g_tau << ")";
        return s.str();
      });

  py::class_<ResetChannel>(m, "ResetChannel")
      .def(py::init<const ChannelParams&>())
      .def(py::init([](int n, double w, double g) { return ResetChannel({n, w, g}); }), py::arg("n_spins"),
           py::arg("omega_tau"), py::arg("g_tau"))
      .def_property_readonly("params", &ResetChannel::params)
      .def_property_readonly("dim", &ResetChannel::dim)
      .def("apply", &ResetChannel::apply)
      .def("step", py::overload_cast<const Matrix&>(&ResetChannel::step, py::const_))
      .def("step_n", py::overload_cast<const Matrix&, long>(&ResetChannel::step, py::const_))
      .def("step_adjoint", &ResetChannel::step_adjoint)
      .def("central_spin_z", &ResetChannel::central_spin_z)
      .def("kraus", [](const ResetChannel& c) { return std::vector<Matrix>(c.blocks().begin(), c.blocks().end()); });

  m.def("superoperator", [](const ResetChannel& c, int power) { return build_superoperator(c, power).matrix; },
        py::arg("channel"), py::arg("power") = 1);
  m.def("choi_matrix", &choi_matrix);

  py::class_<ChannelSpectrum>(m, "ChannelSpectrum")
      .def_property_readonly("dim", &ChannelSpectrum::dim)
      .def_property_readonly("power", &ChannelSpectrum::power)
      .def("__len__", &ChannelSpectrum::size)
      .def_property_readonly("eigenvalues", &ChannelSpectrum::eigenvalues)
      .def_property_readonly("rates", &ChannelSpectrum::rates)
      .def_property_readonly("frequencies", &ChannelSpectrum::frequencies)
      .def("right", &ChannelSpectrum::right)
      .def("left", &ChannelSpectrum::left);

  m.def(
      "decompose",
      [](const ResetChannel& c, int power, bool strict) {
        DecomposeOptions o;
        o.strict = strict;
        return decompose(build_superoperator(c, power), o);
      },
      py::arg("channel"), py::arg("power") = 1, py::arg("strict") = true);
  m.def(
      "leading_eigs",
      [](const ResetChannel& c, int q, int k, bool lefts) {
        ArnoldiOptions o;
        o.lefts = lefts;
        return leading_eigs_matrix_free(c, q, k, o);
      },
      py::arg("channel"), py::arg("q") = 1, py::arg("k") = 10, py::arg("lefts") = true);
  m.def("stationary_state", &stationary_state);
  m.def("stationary_state_direct", &stationary_state_direct);
  m.def("evolve_spectral", &evolve_spectral, py::arg("spectrum"), py::arg("rho0"), py::arg("n"),
        py::arg("modes") = -1);
  m.def("leading_rates", [](const ChannelSpectrum& s) {
    const LeadingRates r = leading_rate_and_gap(s);
    py::dict d;
    d["gamma_1"] = r.gamma_1;
    d["nu_1"] = r.nu_1;
    d["gamma_star"] = r.gamma_star;
    d["ratio"] = r.ratio;
    return d;
  });

  m.def("purity", &purity);
  m.def("basis_state", &basis_state);
  m.def("coherent_state", &coherent_state);
  m.def("projector", &projector);
  m.def(
      "initial_state", [](int n, const std::string& spec) { return make_initial_state(SpinSector(n), spec); },
      py::arg("n_spins"), py::arg("spec") = "up");
  m.def(
      "husimi",
      [](const Matrix& op, int n_theta, int n_phi) { return husimi_dict(husimi_q(op, {n_theta, n_phi})); },
      py::arg("op"), py::arg("n_theta") = 101, py::arg("n_phi") = 201);
  m.def(
      "count_lobes",
      [](const Matrix& op, int n_theta, int n_phi, double fraction) {
        return count_lobes(husimi_q(op, {n_theta, n_phi}), fraction);
      },
      py::arg("op"), py::arg("n_theta") = 101, py::arg("n_phi") = 201, py::arg("fraction") = 0.5);

  py::class_<MetastableManifold>(m, "MetastableManifold")
      .def_readonly("q", &MetastableManifold::q)
      .def_readonly("cycle_step", &MetastableManifold::cycle_step)
      .def_readonly("modes", &MetastableManifold::modes)
      .def_readonly("mus", &MetastableManifold::mus)
      .def_readonly("projectors", &MetastableManifold::projectors)
      .def_readonly("c", &MetastableManifold::c)
      .def_readonly("ratio_r", &MetastableManifold::ratio_r)
      .def_readonly("Gamma", &MetastableManifold::Gamma)
      .def_readonly("delta", &MetastableManifold::delta)
      .def_readonly("Gamma_star", &MetastableManifold::Gamma_star)
      .def_readonly("rho_ss", &MetastableManifold::rho_ss)
      .def("to_dict", [](const MetastableManifold& mf) {
        return py::module_::import("json").attr("loads")(io::manifold_json(mf).dump());
      });

  m.def("analyze_period3", &analyze_period3);
  m.def(
      "extract_ems5",
      [](const ChannelSpectrum& s, std::vector<Index> modes, const ResetChannel* c) { return extract_ems5(s, modes, c); },
      py::arg("spectrum"), py::arg("modes") = std::vector<Index>{}, py::arg("channel") = nullptr);
  m.def("mm_project", &mm_project, py::arg("manifold"), py::arg("rho0"), py::arg("tolerance") = 0.05);

  m.def(
      "purity_map",
      [](int n, const std::vector<double>& g, const std::vector<double>& w, int threads) {
        SweepGrid grid;
        grid.n_spins = n;
        grid.g_tau = g;
        grid.omega_tau = w;
        const SweepResult r = purity_map(grid, {.threads = threads});
        RealMatrix out(static_cast<Index>(g.size()), static_cast<Index>(w.size()));
        for (const auto& rec : r.records) out(rec.i_g, rec.i_omega) = rec.purity;
        return out;
      },
      py::arg("n_spins"), py::arg("g_tau"), py::arg("omega_tau"), py::arg("threads") = 0);

  m.def("parse_angle", &parse_angle);
  m.def("figure_ids", [] {
    std::vector<std::string> ids;
    for (const auto& f : figure_catalog()) ids.push_back(f.id);
    return ids;
  });
  m.def(
      "reproduce_figure",
      [](const std::string& id, const std::filesystem::path& out, const std::string& scale, int threads) {
        FigureOptions o;
        o.scale = scale;
        o.threads = threads;
        return reproduce_figure(id, out, o).dump();
      },
      py::arg("figure"), py::arg("out"), py::arg("scale") = "default", py::arg("threads") = 0);
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
