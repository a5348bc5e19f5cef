// tinet: command-line front-end for certification, dispersion and simulation
// of translation-invariant networks described by JSON model files.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tinet/certify.hpp"
#include "tinet/errors.hpp"
#include "tinet/io.hpp"
#include "tinet/phonon.hpp"
#include "tinet/simulate.hpp"
#include "tinet/spectral.hpp"
#include "tinet/threads.hpp"

using namespace tinet;
using io::Json;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitError = 1;
constexpr int kExitFalse = 2;

struct Globals {
    int grid = 0;
    std::optional<double> tol;
    int threads = 0;
};

TorusGrid grid_for(const Globals& g, int nu) { return g.grid > 0 ? TorusGrid(nu, g.grid) : TorusGrid::default_for(nu); }

void emit(const Json& doc, const std::string& out_path)
{
    if (out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw InvalidArgument("cannot write " + out_path);
    out << doc.dump(2) << '\n';
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path);
    return out;
}

// ---- certify ---------------------------------------------------------------

struct CertifyArgs {
    std::string model;
    std::string property;
    double omega_min = 1e-2;
    double omega_max = 1e3;
    int omega_points = 60;
    std::string out;
};

int run_certify(const CertifyArgs& args, const Globals& g)
{
    const io::ModelFile file = io::load_model(args.model);
    const NetworkModel& model = file.model;
    const TorusGrid grid = grid_for(g, model.nu());
    if (!(args.omega_max > args.omega_min) || !(args.omega_min > 0.0))
        throw InvalidArgument("need 0 < --omega-min < --omega-max");
    const OmegaSweep sweep = OmegaSweep::log_symmetric(args.omega_min, args.omega_max, args.omega_points);
    const SupplySpec supply =
        file.supply ? *file.supply
                    : (model.m() == model.r() ? SupplySpec::identity(model.nu(), model.m())
                                              : throw InvalidArgument("model file has no supply and m != r"));

    const auto run = [&]() -> CertificationReport {
        if (args.property == "dissipative") {
            switch (file.storage_kind) {
            case io::StorageKind::none:
                throw InvalidArgument("dissipative check needs a storage (stencil, \"lyapunov\" or \"hamiltonian\")");
            case io::StorageKind::lyapunov: return check_dissipativity(model, solve_storage(model, grid), supply, g.tol);
            default: return check_dissipativity(model, *file.storage, supply, grid, g.tol);
            }
        }
        if (args.property == "passive") return check_passivity(model, supply, grid, sweep, g.tol);
        if (args.property == "positive-real") return check_positive_real(model, grid, sweep, g.tol);
        if (args.property == "negative-imaginary") return check_negative_imaginary(model, grid, sweep, g.tol);
        throw InvalidArgument("unknown property " + args.property);
    };
    const CertificationReport report = run();
    emit(io::report_to_json(report), args.out);
    return report.verdict ? kExitTrue : kExitFalse;
}

// ---- dispersion ------------------------------------------------------------

struct DispersionArgs {
    std::string model;
    std::string out;
    int sphere_samples = 256;
};

int run_dispersion(const DispersionArgs& args, const Globals& g)
{
    const io::ModelFile file = io::load_model(args.model);
    if (!file.hamiltonian) throw InvalidArgument("dispersion requires a Hamiltonian preset or (M,K) spec");
    const HamiltonianSpec& spec = *file.hamiltonian;
    const TorusGrid grid = grid_for(g, spec.nu());
    const auto surface = dispersion(spec, grid, g.tol);
    if (!args.out.empty()) {
        auto out = open_output(args.out);
        io::write_dispersion_csv(out, surface);
    }
    std::size_t indefinite = 0;
    for (bool f : surface.psd_flags) indefinite += f ? 0 : 1;
    Json summary;
    summary["grid"] = io::grid_to_json(grid);
    summary["branches"] = spec.dof();
    summary["indefinite_nodes"] = indefinite;
    summary["phase_velocity"] =
        io::phase_velocity_to_json(phase_velocity_sup(spec, grid, static_cast<std::size_t>(args.sphere_samples)));
    summary["longwave"] = io::longwave_to_json(longwave_analysis(spec, static_cast<std::size_t>(args.sphere_samples)));
    std::cout << summary.dump(2) << '\n';
    return kExitTrue;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    int period = 16;
    double t_end = 10.0;
    double dt = 1e-3;
    std::string input = "zero";
    double omega = 1.0;
    double width = 1.0;
    double amplitude = 1.0;
    std::string x0 = "zero";
    unsigned seed = 1;
    std::size_t sample_every = 1;
    std::string out;
    std::string dump;
};

struct PhononInput {
    std::vector<int> k;
    int branch;
};

std::optional<PhononInput> parse_phonon(const std::string& spec, int nu)
{
    const std::string prefix = "phonon:";
    if (spec.rfind(prefix, 0) != 0) return std::nullopt;
    std::vector<int> values;
    std::stringstream in(spec.substr(prefix.size()));
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument("bad phonon input \"" + spec + "\" (expected phonon:k,branch)");
        }
    }
    if (static_cast<int>(values.size()) != nu + 1)
        throw InvalidArgument("phonon input needs " + std::to_string(nu) + " wave index value(s) and a branch");
    PhononInput p;
    p.branch = values.back();
    values.pop_back();
    p.k = std::move(values);
    return p;
}

int run_simulate(const SimulateArgs& args, const Globals&)
{
    const io::ModelFile file = io::load_model(args.model);
    const NetworkModel& model = file.model;
    const TruncatedNetwork network(model, args.period);
    const LatticeDft lattice(model.nu(), args.period);
    const auto state_size = static_cast<Eigen::Index>(network.state_size());
    const auto input_size = static_cast<Eigen::Index>(network.input_size());

    SimulationOptions opts;
    opts.sample_every = args.sample_every;
    opts.record_states = !args.dump.empty();
    if (file.storage) opts.storage = *file.storage;
    if (file.supply && file.supply->is_static()) opts.supply = *file.supply;
    else if (!file.supply && model.m() == model.r()) opts.supply = SupplySpec::identity(model.nu(), model.m());

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(state_size);
    if (args.x0 == "random") {
        std::mt19937 rng(args.seed);
        std::normal_distribution<double> d;
        for (auto& v : x0) v = d(rng);
    } else if (args.x0 != "zero") {
        throw InvalidArgument("--x0 must be zero or random");
    }

    Eigen::VectorXd pattern = Eigen::VectorXd::Zero(input_size);
    pattern.head(model.m()).setConstant(args.amplitude);
    InputSignal input;
    std::optional<PlaneWaveReport> phonon;
    if (args.input == "zero") {
        input = inputs::zero(network.input_size());
    } else if (args.input == "pulse") {
        input = inputs::pulse(pattern, args.width);
    } else if (args.input == "sine") {
        input = inputs::sine(pattern, args.omega);
    } else if (auto p = parse_phonon(args.input, model.nu())) {
        if (!file.hamiltonian || file.gamma != 0.0)
            throw InvalidArgument("phonon input requires a lossless Hamiltonian model");
        phonon = plane_wave_check(model, args.period, p->k, p->branch, args.amplitude, args.t_end, args.dt);
        const int n = model.n();
        for (std::size_t j = 0; j < lattice.sites(); ++j) {
            const auto jj = lattice.multi_index(j);
            double phase = 0.0;
            for (int a = 0; a < model.nu(); ++a) phase += jj[a] * phonon->sigma[a];
            x0.segment(static_cast<Eigen::Index>(j) * n, n) =
                args.amplitude * (std::polar(1.0, phase) * phonon->eigenvector).real();
        }
        input = inputs::zero(network.input_size());
    } else {
        throw InvalidArgument("unknown input \"" + args.input + "\" (zero, pulse, sine or phonon:k,branch)");
    }

    const SimulationTrace trace = integrate(network, x0, input, args.t_end, args.dt, opts);
    if (!args.out.empty()) {
        auto out = open_output(args.out);
        io::write_trace_csv(out, trace);
    }
    if (!args.dump.empty()) io::write_state_dump(args.dump, trace);

    Json summary;
    summary["period"] = args.period;
    summary["sites"] = network.sites();
    summary["samples"] = trace.times.size();
    summary["t_end"] = trace.times.back();
    double max_norm = 0.0;
    for (double v : trace.state_norm) max_norm = std::max(max_norm, v);
    summary["max_state_norm"] = max_norm;
    summary["final_state_norm"] = trace.state_norm.back();
    if (!trace.hamiltonian.empty()) {
        double drift = 0.0;
        for (double h : trace.hamiltonian) drift = std::max(drift, std::abs(h - trace.hamiltonian.front()));
        summary["initial_hamiltonian"] = trace.hamiltonian.front();
        summary["final_hamiltonian"] = trace.hamiltonian.back();
        summary["max_hamiltonian_drift"] = drift;
    }
    if (!trace.work.empty()) {
        double min_work = trace.work.front();
        for (double w : trace.work) min_work = std::min(min_work, w);
        summary["final_work"] = trace.work.back();
        summary["min_work"] = min_work;
    }
    if (!trace.dissipation_residual.empty()) {
        double min_res = trace.dissipation_residual.front(), identity_gap = 0.0;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            min_res = std::min(min_res, trace.dissipation_residual[i]);
            identity_gap = std::max(identity_gap, std::abs(trace.dissipation_residual[i] - trace.dissipation_form[i]));
        }
        summary["min_dissipation_residual"] = min_res;
        summary["max_energy_identity_gap"] = identity_gap;
    }
    if (phonon) {
        Json p;
        Json sigma = Json::array();
        for (Eigen::Index a = 0; a < phonon->sigma.size(); ++a) sigma.push_back(phonon->sigma[a]);
        p["sigma"] = std::move(sigma);
        p["frequency"] = phonon->eigenvalue.imag();
        p["eigen_residual"] = phonon->eigen_residual;
        p["residual"] = phonon->residual;
        summary["phonon"] = std::move(p);
    }
    std::cout << summary.dump(2) << '\n';
    return kExitTrue;
}

// ---- norms / export --------------------------------------------------------

int run_norms(const std::string& path, const Globals& g)
{
    const io::ModelFile file = io::load_model(path);
    const NetworkModel& model = file.model;
    const TorusGrid grid = grid_for(g, model.nu());
    Json out;
    out["grid"] = io::grid_to_json(grid);
    Json norms;
    norms["a"] = operator_norm(model.a(), grid);
    norms["b"] = operator_norm(model.b(), grid);
    norms["c"] = operator_norm(model.c(), grid);
    norms["d"] = operator_norm(model.d(), grid);
    out["norms"] = std::move(norms);
    const auto stability = spectral_abscissa(model, grid);
    Json st;
    st["abscissa"] = stability.abscissa;
    Json worst = Json::array();
    for (Eigen::Index a = 0; a < stability.worst_sigma.size(); ++a) worst.push_back(stability.worst_sigma[a]);
    st["worst_sigma"] = std::move(worst);
    st["hurwitz"] = stability.hurwitz;
    out["stability"] = std::move(st);
    if (file.storage) {
        out["storage"] = io::margin_to_json(storage_margin(*file.storage, grid));
    } else if (file.storage_kind == io::StorageKind::lyapunov && stability.hurwitz) {
        out["storage"] = io::margin_to_json(solve_storage(model, grid).margin);
    }
    std::cout << out.dump(2) << '\n';
    return kExitTrue;
}

int run_export(const std::string& path, const std::string& out)
{
    emit(io::export_model(io::load_model(path)), out);
    return kExitTrue;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Analysis of translation-invariant networks on the integer lattice"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    double tol = -1.0;
    app.add_option("--grid", g.grid, "Grid points per axis (default 64 for nu <= 2, 16 for nu = 3)")
        ->check(CLI::PositiveNumber);
    app.add_option("--tol", tol, "PSD / clamping tolerance (default scale-aware)")->check(CLI::NonNegativeNumber);
    app.add_option("--threads", g.threads, "Worker threads for grid sweeps")->check(CLI::PositiveNumber);

    CertifyArgs certify;
    auto* c = app.add_subcommand("certify", "Certify an energy property; exit 0 if true, 2 if false");
    c->add_option("model", certify.model, "Model file")->required();
    c->add_option("--property", certify.property, "Property to certify")
        ->required()
        ->check(CLI::IsMember({"dissipative", "passive", "positive-real", "negative-imaginary"}));
    c->add_option("--omega-min", certify.omega_min, "Smallest nonzero |omega| of the sweep");
    c->add_option("--omega-max", certify.omega_max, "Largest |omega| of the sweep");
    c->add_option("--omega-points", certify.omega_points, "Log-spaced points per sign")->check(CLI::PositiveNumber);
    c->add_option("--out", certify.out, "Write the report here instead of stdout");

    DispersionArgs disp;
    auto* d = app.add_subcommand("dispersion", "Phonon dispersion surface and velocity bounds");
    d->add_option("model", disp.model, "Model file")->required();
    d->add_option("--out", disp.out, "Dispersion CSV");
    d->add_option("--sphere-samples", disp.sphere_samples, "Directions for the long-wave maximum")
        ->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "RK4 simulation on the periodic lattice of period L");
    s->add_option("model", sim.model, "Model file")->required();
    s->add_option("--L", sim.period, "Lattice period per axis")->check(CLI::PositiveNumber);
    s->add_option("--t-end", sim.t_end, "Final time");
    s->add_option("--dt", sim.dt, "Time step");
    s->add_option("--input", sim.input, "zero | pulse | sine | phonon:k,branch");
    s->add_option("--omega", sim.omega, "Angular frequency of the sine input");
    s->add_option("--width", sim.width, "Duration of the pulse input");
    s->add_option("--amplitude", sim.amplitude, "Input or plane-wave amplitude");
    s->add_option("--x0", sim.x0, "Initial state: zero | random");
    s->add_option("--seed", sim.seed, "Seed for --x0 random");
    s->add_option("--sample-every", sim.sample_every, "Record every k-th step")->check(CLI::PositiveNumber);
    s->add_option("--out", sim.out, "Trace CSV");
    s->add_option("--dump-states", sim.dump, "Binary state dump (float64, little-endian) with a .json sidecar");

    std::string norms_model;
    auto* n = app.add_subcommand("norms", "Operator norms, spectral abscissa and storage margin");
    n->add_option("model", norms_model, "Model file")->required();

    std::string export_model, export_out;
    auto* e = app.add_subcommand("export", "Canonical explicit model file");
    e->add_option("model", export_model, "Model file")->required();
    e->add_option("--out", export_out, "Write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitError;
    }

    try {
        if (tol >= 0.0) g.tol = tol;
        if (g.threads > 0) set_thread_count(g.threads);
        if (*c) return run_certify(certify, g);
        if (*d) return run_dispersion(disp, g);
        if (*s) return run_simulate(sim, g);
        if (*n) return run_norms(norms_model, g);
        if (*e) return run_export(export_model, export_out);
    } catch (const std::exception& err) {
        std::cerr << "tinet: error: " << err.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
