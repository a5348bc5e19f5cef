#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tinet/certify.hpp"
#include "tinet/io.hpp"
#include "tinet/models.hpp"
#include "tinet/phonon.hpp"
#include "tinet/simulate.hpp"
#include "tinet/spectral.hpp"
#include "tinet/threads.hpp"

namespace py = pybind11;
using namespace tinet;

namespace {

py::object to_python(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

OmegaSweep make_sweep(double omega_min, double omega_max, int points, bool include_limit)
{
    return OmegaSweep::log_symmetric(omega_min, omega_max, points, include_limit);
}

TorusGrid grid_or_default(std::optional<int> points, int nu)
{
    return points ? TorusGrid(nu, *points) : TorusGrid::default_for(nu);
}

py::dict trace_to_dict(const SimulationTrace& trace)
{
    py::dict d;
    d["times"] = trace.times;
    d["states"] = trace.states;
    d["outputs"] = trace.outputs;
    d["state_norm"] = trace.state_norm;
    d["output_norm"] = trace.output_norm;
    d["input_norm"] = trace.input_norm;
    d["H"] = trace.hamiltonian;
    d["dH"] = trace.hamiltonian_rate;
    d["S"] = trace.supply_rate;
    d["W"] = trace.work;
    d["residual"] = trace.dissipation_residual;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tinet, m)
{
    m.doc() = "Translation-invariant networks on the integer lattice";

    auto error = py::register_exception<Error>(m, "TinetError");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<PreconditionViolation>(m, "PreconditionViolation", error.ptr());
    py::register_exception<ResolventSingular>(m, "ResolventSingular", error.ptr());
    py::register_exception<Divergence>(m, "Divergence", error.ptr());

    py::class_<MatrixStencil>(m, "Stencil")
        .def(py::init<int, int, int>(), py::arg("nu"), py::arg("rows"), py::arg("cols"))
        .def_static("identity", &MatrixStencil::identity, py::arg("nu"), py::arg("size"), py::arg("scale") = 1.0)
        .def_static("from_json",
                    [](const std::string& text) { return io::stencil_from_json(io::Json::parse(text)); })
        .def_property_readonly("nu", &MatrixStencil::nu)
        .def_property_readonly("rows", &MatrixStencil::rows)
        .def_property_readonly("cols", &MatrixStencil::cols)
        .def_property_readonly("blocks",
                               [](const MatrixStencil& s) {
                                   py::dict d;
                                   for (const auto& [offset, block] : s.blocks())
                                       d[py::tuple(py::cast(offset))] = block;
                                   return d;
                               })
        .def("set", &MatrixStencil::set, py::arg("offset"), py::arg("block"), py::return_value_policy::reference)
        .def("at", &MatrixStencil::at)
        .def("adjoint", &MatrixStencil::adjoint)
        .def("symbol", [](const MatrixStencil& s, const Eigen::VectorXd& sigma) { return symbol_eval(s, sigma); })
        .def("norm",
             [](const MatrixStencil& s, std::optional<int> grid) {
                 return operator_norm(s, grid_or_default(grid, s.nu()));
             },
             py::arg("grid") = py::none())
        .def("circulant", &circulant_embed, py::arg("period"))
        .def("to_json", [](const MatrixStencil& s) { return io::stencil_to_json(s).dump(); })
        .def("__eq__", [](const MatrixStencil& a, const MatrixStencil& b) { return a == b; })
        .def("__add__", [](const MatrixStencil& a, const MatrixStencil& b) { return a + b; })
        .def("__rmul__", [](const MatrixStencil& s, double alpha) { return alpha * s; })
        .def("__matmul__", &compose);

    py::class_<TorusGrid>(m, "Grid")
        .def(py::init<int, int>(), py::arg("nu"), py::arg("points_per_axis"))
        .def_static("default_for", &TorusGrid::default_for)
        .def_property_readonly("nu", &TorusGrid::nu)
        .def_property_readonly("points_per_axis", &TorusGrid::points_per_axis)
        .def("__len__", &TorusGrid::size)
        .def("node", &TorusGrid::node);

    py::class_<NetworkModel>(m, "Network")
        .def(py::init<MatrixStencil, MatrixStencil, MatrixStencil, MatrixStencil>(), py::arg("a"), py::arg("b"),
             py::arg("c"), py::arg("d"))
        .def_static("autonomous", &NetworkModel::autonomous)
        .def_property_readonly("nu", &NetworkModel::nu)
        .def_property_readonly("n", &NetworkModel::n)
        .def_property_readonly("m", &NetworkModel::m)
        .def_property_readonly("r", &NetworkModel::r)
        .def_property_readonly("a", &NetworkModel::a)
        .def_property_readonly("b", &NetworkModel::b)
        .def_property_readonly("c", &NetworkModel::c)
        .def_property_readonly("d", &NetworkModel::d)
        .def("transfer_function",
             [](const NetworkModel& model, std::complex<double> s, const Eigen::VectorXd& sigma) {
                 return transfer_function(model, s, sigma);
             },
             py::arg("s"), py::arg("sigma"))
        .def("spectral_abscissa",
             [](const NetworkModel& model, std::optional<int> grid) {
                 const auto report = spectral_abscissa(model, grid_or_default(grid, model.nu()));
                 py::dict d;
                 d["abscissa"] = report.abscissa;
                 d["worst_sigma"] = report.worst_sigma;
                 d["hurwitz"] = report.hurwitz;
                 return d;
             },
             py::arg("grid") = py::none());

    py::class_<HamiltonianSpec>(m, "HamiltonianSpec")
        .def(py::init<Eigen::MatrixXd, MatrixStencil>(), py::arg("mass"), py::arg("stiffness"))
        .def_property_readonly("mass", &HamiltonianSpec::mass)
        .def_property_readonly("stiffness", &HamiltonianSpec::stiffness)
        .def("network", &build_hamiltonian_model)
        .def("storage", [](const HamiltonianSpec& spec) { return hamiltonian_storage(spec).v(); });

    py::class_<io::ModelFile>(m, "ModelFile")
        .def_readonly("model", &io::ModelFile::model)
        .def_readonly("hamiltonian", &io::ModelFile::hamiltonian)
        .def_readonly("gamma", &io::ModelFile::gamma)
        .def("to_json", [](const io::ModelFile& f) { return io::export_model(f).dump(2); });

    m.def("load_model", &io::load_model, py::arg("path"));
    m.def("parse_model", [](const std::string& text) { return io::parse_model(io::Json::parse(text)); },
          py::arg("text"));

    m.def("chain", [](double mass, double kappa) { return models::chain_spec({mass, kappa, 0.0}); },
          py::arg("mass") = 1.0, py::arg("kappa") = 1.0);
    m.def("plate", [](double rho, double beta, double h) { return models::plate_spec({rho, beta, h}); },
          py::arg("rho") = 1.0, py::arg("beta") = 1.0, py::arg("h") = 1.0);
    m.def("pinned", &models::pinned, py::arg("spec"), py::arg("eps") = 0.1);
    m.def("actuated",
          [](const HamiltonianSpec& spec, double gamma, const std::string& sensing) {
              if (sensing != "velocity" && sensing != "position")
                  throw InvalidArgument("sensing must be 'velocity' or 'position', got '" + sensing + "'");
              return models::actuated_hamiltonian(
                  spec, gamma, sensing == "velocity" ? models::Sensing::velocity : models::Sensing::position);
          },
          py::arg("spec"), py::arg("gamma"), py::arg("sensing") = "velocity");

    m.def("check_passive",
          [](const NetworkModel& model, std::optional<int> grid, double omega_min, double omega_max, int points,
             bool include_limit, std::optional<double> tol) {
              const auto report =
                  check_passivity(model, SupplySpec::identity(model.nu(), model.m()), grid_or_default(grid, model.nu()),
                                  make_sweep(omega_min, omega_max, points, include_limit), tol);
              return to_python(io::report_to_json(report));
          },
          py::arg("model"), py::arg("grid") = py::none(), py::arg("omega_min") = 1e-2, py::arg("omega_max") = 1e3,
          py::arg("points") = 60, py::arg("include_limit") = true, py::arg("tol") = py::none());
    m.def("check_positive_real",
          [](const NetworkModel& model, std::optional<int> grid, double omega_min, double omega_max, int points,
             bool include_limit, std::optional<double> tol) {
              const auto report = check_positive_real(model, grid_or_default(grid, model.nu()),
                                                      make_sweep(omega_min, omega_max, points, include_limit), tol);
              return to_python(io::report_to_json(report));
          },
          py::arg("model"), py::arg("grid") = py::none(), py::arg("omega_min") = 1e-2, py::arg("omega_max") = 1e3,
          py::arg("points") = 60, py::arg("include_limit") = true, py::arg("tol") = py::none());
    m.def("check_negative_imaginary",
          [](const NetworkModel& model, std::optional<int> grid, double omega_min, double omega_max, int points,
             bool include_limit, std::optional<double> tol) {
              const auto report = check_negative_imaginary(model, grid_or_default(grid, model.nu()),
                                                           make_sweep(omega_min, omega_max, points, include_limit), tol);
              return to_python(io::report_to_json(report));
          },
          py::arg("model"), py::arg("grid") = py::none(), py::arg("omega_min") = 1e-2, py::arg("omega_max") = 1e3,
          py::arg("points") = 60, py::arg("include_limit") = true, py::arg("tol") = py::none());
    m.def("check_dissipative",
          [](const NetworkModel& model, const MatrixStencil& storage, const std::optional<MatrixStencil>& supply,
             std::optional<int> grid, std::optional<double> tol) {
              const SupplySpec g = supply ? SupplySpec(*supply) : SupplySpec::identity(model.nu(), model.m());
              const auto report =
                  check_dissipativity(model, StorageSpec(storage), g, grid_or_default(grid, model.nu()), tol);
              return to_python(io::report_to_json(report));
          },
          py::arg("model"), py::arg("storage"), py::arg("supply") = py::none(), py::arg("grid") = py::none(),
          py::arg("tol") = py::none());
    m.def("storage_margin",
          [](const MatrixStencil& storage, std::optional<int> grid) {
              return to_python(io::margin_to_json(storage_margin(StorageSpec(storage), grid_or_default(grid, storage.nu()))));
          },
          py::arg("storage"), py::arg("grid") = py::none());

    m.def("dispersion",
          [](const HamiltonianSpec& spec, std::optional<int> grid) {
              const auto surface = dispersion(spec, grid_or_default(grid, spec.nu()));
              py::dict d;
              std::vector<Eigen::VectorXd> nodes;
              for (std::size_t i = 0; i < surface.grid.size(); ++i) nodes.push_back(surface.grid.node(i));
              d["sigma"] = nodes;
              d["omega"] = surface.branches;
              d["psd"] = surface.psd_flags;
              return d;
          },
          py::arg("spec"), py::arg("grid") = py::none());
    m.def("phase_velocity",
          [](const HamiltonianSpec& spec, std::optional<int> grid, std::size_t samples) {
              return to_python(io::phase_velocity_to_json(phase_velocity_sup(spec, grid_or_default(grid, spec.nu()), samples)));
          },
          py::arg("spec"), py::arg("grid") = py::none(), py::arg("sphere_samples") = 256);
    m.def("longwave",
          [](const HamiltonianSpec& spec, std::size_t samples) {
              return to_python(io::longwave_to_json(longwave_analysis(spec, samples)));
          },
          py::arg("spec"), py::arg("sphere_samples") = 256);

    m.def("simulate",
          [](const NetworkModel& model, int period, const Eigen::VectorXd& x0, double t_end, double dt,
             std::optional<std::function<Eigen::VectorXd(double)>> input, const std::optional<MatrixStencil>& storage,
             bool with_supply, std::size_t sample_every) {
              const TruncatedNetwork net(model, period);
              SimulationOptions options;
              if (storage) options.storage = StorageSpec(*storage);
              if (with_supply) options.supply = SupplySpec::identity(model.nu(), model.m());
              options.sample_every = sample_every;
              if (input) return trace_to_dict(integrate(net, x0, InputSignal(*input), t_end, dt, options));
              SimulationTrace trace;
              {
                  py::gil_scoped_release release;
                  trace = integrate(net, x0, inputs::zero(net.input_size()), t_end, dt, options);
              }
              return trace_to_dict(trace);
          },
          py::arg("model"), py::arg("period"), py::arg("x0"), py::arg("t_end"), py::arg("dt"),
          py::arg("input") = py::none(), py::arg("storage") = py::none(), py::arg("supply") = false,
          py::arg("sample_every") = 1);
    m.def("phonon_wave_check",
          [](const HamiltonianSpec& spec, int period, const std::vector<int>& k, int branch, double amplitude,
             double t_end, double dt) {
              const auto report = phonon_wave_check(spec, period, k, branch, amplitude, t_end, dt);
              py::dict d;
              d["sigma"] = report.sigma;
              d["eigenvalue"] = report.eigenvalue;
              d["eigen_residual"] = report.eigen_residual;
              d["residual"] = report.residual;
              return d;
          },
          py::arg("spec"), py::arg("period"), py::arg("k"), py::arg("branch") = 0, py::arg("amplitude") = 1.0,
          py::arg("t_end") = 1.0, py::arg("dt") = 1e-2);

    m.def("set_threads", &set_thread_count);
    m.def("threads", &thread_count);
}
