#include "tinet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "parallel.hpp"
#include "tinet/errors.hpp"

namespace tinet {

namespace {

using cd = std::complex<double>;

std::size_t lattice_size(int nu, int period)
{
    std::size_t count = 1;
    for (int a = 0; a < nu; ++a) count *= static_cast<std::size_t>(period);
    return count;
}

std::size_t step_count(double t_end, double dt)
{
    if (!(dt > 0.0)) throw InvalidArgument("time step dt must be positive");
    if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

void check_step(double dt, double a_norm)
{
    if (!(dt * a_norm < 0.5)) {
        std::ostringstream msg;
        msg << "time step too large for stable RK4: dt * ||A|| = " << dt * a_norm << " must be below 0.5 (||A|| = "
            << a_norm << ")";
        throw InvalidArgument(msg.str());
    }
}

bool is_sample(std::size_t step, std::size_t total, std::size_t every) { return step % every == 0 || step == total; }

}  // namespace

LatticeDft::LatticeDft(int nu, int period)
    : nu_(nu), period_(period), sites_(0), forward_kernel_(period, period), inverse_kernel_(period, period)
{
    if (nu < 1) throw InvalidArgument("lattice dimension nu must be positive");
    if (period < 1) throw InvalidArgument("period must be positive");
    sites_ = lattice_size(nu, period);
    for (int k = 0; k < period; ++k) {
        for (int j = 0; j < period; ++j) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>((k * j) % period) / period;
            forward_kernel_(k, j) = std::polar(1.0, -phase);
            inverse_kernel_(k, j) = std::polar(1.0 / period, phase);
        }
    }
}

std::vector<int> LatticeDft::multi_index(std::size_t index) const
{
    std::vector<int> k(nu_);
    for (int a = nu_ - 1; a >= 0; --a) {
        k[a] = static_cast<int>(index % period_);
        index /= period_;
    }
    return k;
}

Eigen::VectorXd LatticeDft::frequency(std::size_t index) const
{
    const auto k = multi_index(index);
    Eigen::VectorXd sigma(nu_);
    for (int a = 0; a < nu_; ++a) sigma[a] = 2.0 * std::numbers::pi * k[a] / period_;
    return sigma;
}

void LatticeDft::apply(Eigen::VectorXcd& data, int block, const Eigen::MatrixXcd& kernel) const
{
    if (data.size() != static_cast<Eigen::Index>(sites_ * block))
        throw InvalidArgument("lattice vector has the wrong length for this period and block size");
    Eigen::VectorXcd line(period_);
    Eigen::VectorXcd transformed(period_);
    std::size_t outer = 1;
    for (int axis = 0; axis < nu_; ++axis) {
        // digit of `axis` has stride L^{nu-1-axis} sites
        const std::size_t stride = lattice_size(nu_ - 1 - axis, period_) * static_cast<std::size_t>(block);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < stride; ++i) {
                const std::size_t base = o * period_ * stride + i;
                for (int j = 0; j < period_; ++j) line[j] = data[base + j * stride];
                transformed.noalias() = kernel * line;
                for (int j = 0; j < period_; ++j) data[base + j * stride] = transformed[j];
            }
        }
        outer *= static_cast<std::size_t>(period_);
    }
}

Eigen::VectorXcd LatticeDft::forward(const Eigen::Ref<const Eigen::VectorXcd>& x, int block) const
{
    Eigen::VectorXcd out = x;
    apply(out, block, forward_kernel_);
    return out;
}

Eigen::VectorXcd LatticeDft::forward(const Eigen::Ref<const Eigen::VectorXd>& x, int block) const
{
    Eigen::VectorXcd out = x.cast<cd>();
    apply(out, block, forward_kernel_);
    return out;
}

Eigen::VectorXcd LatticeDft::inverse(const Eigen::Ref<const Eigen::VectorXcd>& x, int block) const
{
    Eigen::VectorXcd out = x;
    apply(out, block, inverse_kernel_);
    return out;
}

Eigen::SparseMatrix<double> circulant_sparse(const MatrixStencil& stencil, int period)
{
    check_period(stencil, period);
    const int nu = stencil.nu();
    const int rows = stencil.rows();
    const int cols = stencil.cols();
    const std::size_t count = lattice_size(nu, period);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(count * stencil.blocks().size() * rows * cols);
    std::vector<int> k(nu);
    for (std::size_t site = 0; site < count; ++site) {
        std::size_t rem = site;
        for (int a = nu - 1; a >= 0; --a) {
            k[a] = static_cast<int>(rem % period);
            rem /= period;
        }
        for (const auto& [offset, block] : stencil.blocks()) {
            std::size_t row_site = 0;
            for (int a = 0; a < nu; ++a) row_site = row_site * period + ((k[a] + offset[a]) % period + period) % period;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    if (block(r, c) != 0.0)
                        triplets.emplace_back(static_cast<int>(row_site * rows + r), static_cast<int>(site * cols + c),
                                              block(r, c));
        }
    }
    Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(count * rows), static_cast<Eigen::Index>(count * cols));
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

TruncatedNetwork::TruncatedNetwork(NetworkModel model, int period)
    : model_(std::move(model)),
      period_(period),
      sites_(lattice_size(model_.nu(), period)),
      a_(circulant_sparse(model_.a(), period)),
      b_(circulant_sparse(model_.b(), period)),
      c_(circulant_sparse(model_.c(), period)),
      d_(circulant_sparse(model_.d(), period)),
      a_norm_(operator_norm(model_.a(), TorusGrid::default_for(model_.nu())))
{
}

namespace inputs {

InputSignal zero(std::size_t size)
{
    return [size](double) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size)); };
}

InputSignal pulse(Eigen::VectorXd pattern, double width)
{
    if (!(width > 0.0)) throw InvalidArgument("pulse width must be positive");
    return [pattern = std::move(pattern), width](double t) -> Eigen::VectorXd {
        if (t < 0.0 || t > width) return Eigen::VectorXd::Zero(pattern.size());
        const double s = std::sin(std::numbers::pi * t / width);
        return pattern * (s * s);
    };
}

InputSignal sine(Eigen::VectorXd pattern, double omega)
{
    return [pattern = std::move(pattern), omega](double t) -> Eigen::VectorXd { return pattern * std::sin(omega * t); };
}

InputSignal plane_wave(const LatticeDft& lattice, const std::vector<int>& k_index, Eigen::VectorXcd z, double omega)
{
    if (static_cast<int>(k_index.size()) != lattice.nu()) throw InvalidArgument("k_index length must equal nu");
    const std::size_t sites = lattice.sites();
    std::vector<double> phase(sites);
    for (std::size_t s = 0; s < sites; ++s) {
        const auto j = lattice.multi_index(s);
        long long acc = 0;
        for (int a = 0; a < lattice.nu(); ++a) acc += static_cast<long long>(j[a]) * k_index[a];
        phase[s] = 2.0 * std::numbers::pi * static_cast<double>(acc % lattice.period()) / lattice.period();
    }
    return [phase = std::move(phase), z = std::move(z), omega](double t) -> Eigen::VectorXd {
        const auto m = z.size();
        Eigen::VectorXd u(static_cast<Eigen::Index>(phase.size()) * m);
        for (std::size_t s = 0; s < phase.size(); ++s)
            u.segment(static_cast<Eigen::Index>(s) * m, m) = (std::polar(1.0, omega * t + phase[s]) * z).real();
        return u;
    };
}

InputSignal sampled(std::vector<Eigen::VectorXd> samples, double dt)
{
    if (samples.empty()) throw InvalidArgument("sampled input needs at least one sample");
    if (!(dt > 0.0)) throw InvalidArgument("sample spacing must be positive");
    return [samples = std::move(samples), dt](double t) -> Eigen::VectorXd {
        if (t <= 0.0) return samples.front();
        const double pos = t / dt;
        const auto i = static_cast<std::size_t>(std::floor(pos));
        if (i + 1 >= samples.size()) return samples.back();
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * samples[i] + w * samples[i + 1];
    };
}

}  // namespace inputs

SimulationTrace integrate(const TruncatedNetwork& network, const Eigen::Ref<const Eigen::VectorXd>& x0,
                          const InputSignal& input, double t_end, double dt, const SimulationOptions& options)
{
    const NetworkModel& model = network.model();
    const int period = network.period();
    if (x0.size() != static_cast<Eigen::Index>(network.state_size()))
        throw InvalidArgument("initial state has the wrong length for the truncated network");
    const std::size_t steps = step_count(t_end, dt);
    check_step(dt, network.a_norm());
    const std::size_t every = std::max<std::size_t>(1, options.sample_every);

    std::optional<Eigen::SparseMatrix<double>> v, g;
    if (options.storage) {
        if (options.storage->v().nu() != model.nu() || options.storage->v().rows() != model.n())
            throw InvalidArgument("storage must be n x n on the model lattice");
        v = circulant_sparse(options.storage->v(), period);
    }
    if (options.supply) {
        if (!options.supply->is_static()) throw InvalidArgument("simulation supports static supplies only");
        const auto& gs = options.supply->static_part();
        if (gs.nu() != model.nu() || gs.rows() != model.m() || gs.cols() != model.r())
            throw InvalidArgument("supply must be m x r on the model lattice");
        g = circulant_sparse(gs, period);
    }

    // Dissipation matrices at the circulant frequencies for the N-form.
    const bool energy = v && g;
    const LatticeDft lattice(model.nu(), period);
    std::vector<ComplexMatrix> n_blocks;
    if (energy) {
        n_blocks.resize(lattice.sites());
        detail::parallel_for(lattice.sites(), [&](std::size_t k) {
            const Eigen::VectorXd sigma = lattice.frequency(k);
            n_blocks[k] = dissipation_matrix(model.symbols(sigma), symbol_eval(options.storage->v(), sigma),
                                             symbol_eval(options.supply->static_part(), sigma));
        });
    }

    const auto& A = network.a();
    const auto& B = network.b();
    const auto& C = network.c();
    const auto& D = network.d();
    const int n = model.n();
    const int m = model.m();

    SimulationTrace trace;
    auto supply_at = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> double {
        const Eigen::VectorXd y = C * x + D * u;
        return u.dot(*g * y);
    };
    auto record = [&](double t, const Eigen::VectorXd& x, double work) {
        const Eigen::VectorXd u = input(t);
        const Eigen::VectorXd y = C * x + D * u;
        trace.times.push_back(t);
        trace.state_norm.push_back(x.norm());
        trace.input_norm.push_back(u.norm());
        trace.output_norm.push_back(y.norm());
        double hdot = 0.0, s = 0.0;
        if (v) {
            const Eigen::VectorXd vx = *v * x;
            trace.hamiltonian.push_back(0.5 * x.dot(vx));
            hdot = vx.dot(A * x + B * u);
            trace.hamiltonian_rate.push_back(hdot);
        }
        if (g) {
            s = u.dot(*g * y);
            trace.supply_rate.push_back(s);
            trace.work.push_back(work);
        }
        if (energy) {
            trace.dissipation_residual.push_back(s - hdot);
            const Eigen::VectorXcd xf = lattice.forward(x, n);
            const Eigen::VectorXcd uf = lattice.forward(u, m);
            double form = 0.0;
            Eigen::VectorXcd z(n + m);
            for (std::size_t k = 0; k < lattice.sites(); ++k) {
                z.head(n) = xf.segment(static_cast<Eigen::Index>(k) * n, n);
                z.tail(m) = uf.segment(static_cast<Eigen::Index>(k) * m, m);
                form += z.dot(n_blocks[k] * z).real();
            }
            trace.dissipation_form.push_back(form / (2.0 * static_cast<double>(lattice.sites())));
        }
        if (options.record_states) {
            trace.states.push_back(x);
            trace.inputs.push_back(u);
            trace.outputs.push_back(y);
        }
    };

    Eigen::VectorXd x = x0;
    double work = 0.0;
    record(0.0, x, work);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step - 1) * dt;
        const Eigen::VectorXd u1 = input(t);
        const Eigen::VectorXd u2 = input(t + 0.5 * dt);
        const Eigen::VectorXd u4 = input(t + dt);
        const Eigen::VectorXd k1 = A * x + B * u1;
        const Eigen::VectorXd x2 = x + 0.5 * dt * k1;
        const Eigen::VectorXd k2 = A * x2 + B * u2;
        const Eigen::VectorXd x3 = x + 0.5 * dt * k2;
        const Eigen::VectorXd k3 = A * x3 + B * u2;
        const Eigen::VectorXd x4 = x + dt * k3;
        const Eigen::VectorXd k4 = A * x4 + B * u4;
        if (g)
            work += dt / 6.0 *
                    (supply_at(x, u1) + 2.0 * supply_at(x2, u2) + 2.0 * supply_at(x3, u2) + supply_at(x4, u4));
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = static_cast<double>(step) * dt;
        if (!x.allFinite()) throw Divergence(t_next);
        if (is_sample(step, steps, every)) record(t_next, x, work);
    }
    return trace;
}

SpectralInput spectral_input(const LatticeDft& lattice, InputSignal input, int m)
{
    return [&lattice, input = std::move(input), m](double t) {
        const Eigen::VectorXcd uf = lattice.forward(input(t), m);
        std::vector<Eigen::VectorXcd> out(lattice.sites());
        for (std::size_t k = 0; k < lattice.sites(); ++k) out[k] = uf.segment(static_cast<Eigen::Index>(k) * m, m);
        return out;
    };
}

SpectralTrace spectral_integrate(const NetworkModel& model, int period, const std::vector<Eigen::VectorXcd>& x0,
                                 const SpectralInput& input, double t_end, double dt, std::size_t sample_every)
{
    const LatticeDft lattice(model.nu(), period);
    const std::size_t nodes = lattice.sites();
    if (x0.size() != nodes) throw InvalidArgument("need one initial spectral state per circulant frequency");
    const std::size_t steps = step_count(t_end, dt);
    check_step(dt, operator_norm(model.a(), TorusGrid::default_for(model.nu())));
    const std::size_t every = std::max<std::size_t>(1, sample_every);

    std::vector<NetworkSymbols> sym(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        sym[k] = model.symbols(lattice.frequency(k));
        if (x0[k].size() != model.n()) throw InvalidArgument("spectral initial state has the wrong length");
    }

    SpectralTrace trace;
    std::vector<Eigen::VectorXcd> x = x0;
    auto record = [&](double t) {
        const auto u = input(t);
        std::vector<Eigen::VectorXcd> y(nodes);
        for (std::size_t k = 0; k < nodes; ++k) y[k] = sym[k].c * x[k] + sym[k].d * u[k];
        trace.times.push_back(t);
        trace.states.push_back(x);
        trace.outputs.push_back(std::move(y));
    };

    record(0.0);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step - 1) * dt;
        const auto u1 = input(t);
        const auto u2 = input(t + 0.5 * dt);
        const auto u4 = input(t + dt);
        for (std::size_t k = 0; k < nodes; ++k) {
            const auto& a = sym[k].a;
            const auto& b = sym[k].b;
            const Eigen::VectorXcd k1 = a * x[k] + b * u1[k];
            const Eigen::VectorXcd k2 = a * (x[k] + 0.5 * dt * k1) + b * u2[k];
            const Eigen::VectorXcd k3 = a * (x[k] + 0.5 * dt * k2) + b * u2[k];
            const Eigen::VectorXcd k4 = a * (x[k] + dt * k3) + b * u4[k];
            x[k] += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!x[k].allFinite()) throw Divergence(static_cast<double>(step) * dt);
        }
        if (is_sample(step, steps, every)) record(static_cast<double>(step) * dt);
    }
    return trace;
}

Eigen::VectorXd to_lattice(const LatticeDft& lattice, const std::vector<Eigen::VectorXcd>& per_node)
{
    if (per_node.size() != lattice.sites()) throw InvalidArgument("need one vector per circulant frequency");
    const auto block = per_node.front().size();
    Eigen::VectorXcd stacked(static_cast<Eigen::Index>(lattice.sites()) * block);
    for (std::size_t k = 0; k < lattice.sites(); ++k) stacked.segment(static_cast<Eigen::Index>(k) * block, block) = per_node[k];
    return lattice.inverse(stacked, static_cast<int>(block)).real();
}

PlaneWaveReport plane_wave_check(const NetworkModel& model, int period, const std::vector<int>& k_index, int branch,
                                 double amplitude, double t_end, double dt)
{
    const LatticeDft lattice(model.nu(), period);
    if (static_cast<int>(k_index.size()) != model.nu()) throw InvalidArgument("k_index length must equal nu");
    std::size_t flat = 0;
    for (int a = 0; a < model.nu(); ++a) {
        if (k_index[a] < 0 || k_index[a] >= period) throw InvalidArgument("k_index outside [0, L)");
        flat = flat * period + static_cast<std::size_t>(k_index[a]);
    }
    const Eigen::VectorXd sigma = lattice.frequency(flat);
    const ComplexMatrix a = symbol_eval(model.a(), sigma);

    Eigen::ComplexEigenSolver<ComplexMatrix> eig(a);
    if (eig.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", sigma);
    const Eigen::VectorXcd& values = eig.eigenvalues();
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values[i].imag() >= -1e-9 * (1.0 + std::abs(values[i]))) candidates.push_back(i);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](Eigen::Index p, Eigen::Index q) { return values[p].imag() < values[q].imag(); });
    if (branch < 0 || branch >= static_cast<int>(candidates.size()))
        throw InvalidArgument("branch index out of range for the eigenvalues with nonnegative imaginary part");

    PlaneWaveReport report;
    report.sigma = sigma;
    const Eigen::Index pick = candidates[static_cast<std::size_t>(branch)];
    report.eigenvalue = values[pick];
    report.eigenvector = eig.eigenvectors().col(pick).normalized();
    const cd s = report.eigenvalue;
    if (std::abs(s.real()) > 1e-9 * (1.0 + std::abs(s))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "plane-wave check needs a purely imaginary eigenvalue, got " << s.real() << " + " << s.imag()
            << "i at sigma = " << format_vector(sigma);
        throw PreconditionViolation(msg.str());
    }
    report.eigen_residual = (a * report.eigenvector - s * report.eigenvector).norm();
    if (report.eigen_residual > 1e-9) throw PreconditionViolation("eigenpair residual above 1e-9");

    const int n = model.n();
    const std::size_t sites = lattice.sites();
    std::vector<double> phase(sites);
    for (std::size_t j = 0; j < sites; ++j) {
        const auto jj = lattice.multi_index(j);
        double p = 0.0;
        for (int ax = 0; ax < model.nu(); ++ax) p += jj[ax] * sigma[ax];
        phase[j] = p;
    }
    auto analytic = [&](double t) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(sites) * n);
        for (std::size_t j = 0; j < sites; ++j)
            x.segment(static_cast<Eigen::Index>(j) * n, n) =
                amplitude * (std::exp(s * t + cd(0.0, phase[j])) * report.eigenvector).real();
        return x;
    };

    const TruncatedNetwork network(model, period);
    SimulationOptions options;
    const SimulationTrace trace =
        integrate(network, analytic(0.0), inputs::zero(network.input_size()), t_end, dt, options);
    report.residual = 0.0;
    if (amplitude != 0.0) {
        for (std::size_t i = 0; i < trace.times.size(); ++i)
            report.residual =
                std::max(report.residual, (trace.states[i] - analytic(trace.times[i])).norm() / std::abs(amplitude));
    }
    return report;
}

PlaneWaveReport phonon_wave_check(const HamiltonianSpec& spec, int period, const std::vector<int>& k_index,
                                  int branch, double amplitude, double t_end, double dt)
{
    return plane_wave_check(build_hamiltonian_model(spec), period, k_index, branch, amplitude, t_end, dt);
}

}  // namespace tinet
