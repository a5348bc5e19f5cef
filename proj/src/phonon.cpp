#include "tinet/phonon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "parallel.hpp"
#include "tinet/errors.hpp"

namespace tinet {

namespace {

double spectral_norm(const Eigen::MatrixXd& m)
{
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Eigen::VectorXd offset_vector(const Offset& l)
{
    Eigen::VectorXd v(l.size());
    for (std::size_t a = 0; a < l.size(); ++a) v[a] = l[a];
    return v;
}

}  // namespace

HamiltonianSpec::HamiltonianSpec(Eigen::MatrixXd mass, MatrixStencil stiffness)
    : mass_(std::move(mass)), stiffness_(std::move(stiffness))
{
    if (mass_.rows() == 0 || mass_.rows() != mass_.cols()) throw InvalidArgument("mass matrix must be square");
    if (stiffness_.rows() != mass_.rows() || stiffness_.cols() != mass_.rows())
        throw InvalidArgument("stiffness blocks must match the mass matrix size");
    const double scale = 1.0 + mass_.cwiseAbs().maxCoeff();
    if ((mass_ - mass_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("mass matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mass_);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0.0))
        throw InvalidArgument("mass matrix must be positive definite");
    mass_inverse_ = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    mass_inverse_sqrt_ = eig.operatorInverseSqrt();

    double kscale = 0.0;
    for (const auto& [offset, block] : stiffness_.blocks()) kscale = std::max(kscale, block.cwiseAbs().maxCoeff());
    const MatrixStencil adj = stiffness_.adjoint();
    for (const auto& [offset, block] : stiffness_.blocks())
        if ((block - adj.at(offset)).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + kscale))
            throw InvalidArgument("stiffness violates K_{-l} = K_l^T at offset " + format_vector(offset_vector(offset)));
}

NetworkModel build_hamiltonian_model(const HamiltonianSpec& spec)
{
    const int h = spec.dof();
    const int nu = spec.nu();
    MatrixStencil a(nu, 2 * h, 2 * h);
    Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(2 * h, 2 * h);
    origin.topRightCorner(h, h) = spec.mass_inverse();
    a.set(Offset(nu, 0), origin);
    for (const auto& [offset, k] : spec.stiffness().blocks()) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * h, 2 * h);
        block.bottomLeftCorner(h, h) = -k;
        a.add(offset, block);
    }
    return NetworkModel::autonomous(std::move(a));
}

StorageSpec hamiltonian_storage(const HamiltonianSpec& spec)
{
    const int h = spec.dof();
    const int nu = spec.nu();
    MatrixStencil v(nu, 2 * h, 2 * h);
    Eigen::MatrixXd origin = Eigen::MatrixXd::Zero(2 * h, 2 * h);
    origin.bottomRightCorner(h, h) = spec.mass_inverse();
    v.set(Offset(nu, 0), origin);
    for (const auto& [offset, k] : spec.stiffness().blocks()) {
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * h, 2 * h);
        block.topLeftCorner(h, h) = k;
        v.add(offset, block);
    }
    return StorageSpec(std::move(v));
}

Eigen::VectorXd stiffness_eigenvalues(const HamiltonianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    const ComplexMatrix k = symbol_eval(spec.stiffness(), sigma);
    const ComplexMatrix w = spec.mass_inverse_sqrt().cast<std::complex<double>>();
    ComplexMatrix scaled = w * k * w;
    scaled = 0.5 * (scaled + scaled.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(scaled, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalFailure("stiffness eigensolver did not converge", sigma);
    return eig.eigenvalues();
}

DispersionSurface dispersion(const HamiltonianSpec& spec, const TorusGrid& grid, std::optional<double> tol)
{
    if (grid.nu() != spec.nu()) throw InvalidArgument("grid and stiffness lattice dimensions differ");
    DispersionSurface surface{grid, std::vector<Eigen::VectorXd>(grid.size()),
                              std::vector<Eigen::VectorXd>(grid.size()), std::vector<bool>(grid.size())};
    std::vector<char> flags(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        const Eigen::VectorXd lambda = stiffness_eigenvalues(spec, sigma);
        double slack = 0.0;
        if (tol) {
            slack = *tol;
        } else {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> keig(symbol_eval(spec.stiffness(), sigma),
                                                              Eigen::EigenvaluesOnly);
            slack = 1e-10 * (1.0 + keig.eigenvalues().cwiseAbs().maxCoeff());
        }
        flags[i] = lambda(0) >= -slack ? 1 : 0;
        surface.eigenvalues[i] = lambda;
        surface.branches[i] = lambda.cwiseMax(0.0).cwiseSqrt();
    });
    for (std::size_t i = 0; i < grid.size(); ++i) surface.psd_flags[i] = flags[i] != 0;
    return surface;
}

std::vector<Eigen::VectorXd> unit_sphere_samples(int nu, std::size_t count)
{
    std::vector<Eigen::VectorXd> out;
    if (nu == 1) {
        out.push_back(Eigen::VectorXd::Constant(1, 1.0));
        out.push_back(Eigen::VectorXd::Constant(1, -1.0));
        return out;
    }
    if (count == 0) throw InvalidArgument("need at least one sphere sample");
    out.reserve(count);
    if (nu == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
            Eigen::VectorXd t(2);
            t << std::cos(phi), std::sin(phi);
            out.push_back(t);
        }
        return out;
    }
    // Fibonacci lattice on S^2, embedded in the first three axes for nu > 3.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        const double radius = std::sqrt(1.0 - z * z);
        const double phi = golden * static_cast<double>(k);
        Eigen::VectorXd t = Eigen::VectorXd::Zero(nu);
        t[0] = radius * std::cos(phi);
        t[1] = radius * std::sin(phi);
        t[2] = z;
        out.push_back(t);
    }
    return out;
}

LongWaveReport longwave_analysis(const HamiltonianSpec& spec, std::size_t sphere_samples)
{
    const int nu = spec.nu();
    const int h = spec.dof();
    LongWaveReport report;
    report.gamma.assign(nu, std::vector<Eigen::MatrixXd>(nu, Eigen::MatrixXd::Zero(h, h)));
    report.second_moment = 0.0;
    for (const auto& [offset, k] : spec.stiffness().blocks()) {
        double l2 = 0.0;
        for (int j = 0; j < nu; ++j) {
            l2 += static_cast<double>(offset[j]) * offset[j];
            for (int i = 0; i < nu; ++i) report.gamma[j][i] -= static_cast<double>(offset[j] * offset[i]) * k;
        }
        report.second_moment += l2 * spectral_norm(k);
    }
    report.sum_zero_residual = spectral_norm(spec.stiffness().block_sum());

    const auto thetas = unit_sphere_samples(nu, sphere_samples);
    report.sphere_samples = thetas.size();
    report.longwave_speed = 0.0;
    report.min_directional_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& theta : thetas) {
        Eigen::MatrixXd directional = Eigen::MatrixXd::Zero(h, h);
        for (int j = 0; j < nu; ++j)
            for (int i = 0; i < nu; ++i) directional += theta[j] * theta[i] * report.gamma[j][i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> plain(directional, Eigen::EigenvaluesOnly);
        report.min_directional_eigenvalue = std::min(report.min_directional_eigenvalue, plain.eigenvalues()(0));
        const Eigen::MatrixXd scaled = spec.mass_inverse_sqrt() * directional * spec.mass_inverse_sqrt();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled, Eigen::EigenvaluesOnly);
        const double lmax = eig.eigenvalues()(h - 1);
        report.longwave_speed = std::max(report.longwave_speed, std::sqrt(std::max(0.0, 0.5 * lmax)));
    }
    return report;
}

PhaseVelocity phase_velocity_sup(const HamiltonianSpec& spec, const TorusGrid& grid, std::size_t sphere_samples)
{
    const DispersionSurface surface = dispersion(spec, grid);
    const LongWaveReport longwave = longwave_analysis(spec, sphere_samples);

    PhaseVelocity out;
    out.grid_value = 0.0;
    out.grid_witness = Eigen::VectorXd::Zero(grid.nu());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Eigen::VectorXd sigma = grid.node(i);
        const double radius = sigma.norm();
        if (radius == 0.0) continue;
        const double speed = surface.branches[i].maxCoeff() / radius;
        if (speed > out.grid_value) {
            out.grid_value = speed;
            out.grid_witness = sigma;
        }
    }
    out.longwave_speed = longwave.longwave_speed;
    out.value = std::max(out.grid_value, out.longwave_speed);
    out.attained_in_limit = out.longwave_speed >= out.grid_value;

    double block_norms = 0.0;
    for (const auto& [offset, k] : spec.stiffness().blocks()) block_norms += spectral_norm(k);
    const bool zero_sum = longwave.sum_zero_residual <= 1e-12 * (1.0 + block_norms);
    const bool psd = std::all_of(surface.psd_flags.begin(), surface.psd_flags.end(), [](bool f) { return f; });
    out.hypotheses_met = zero_sum && psd;
    if (!zero_sum) out.note = "hypotheses-not-met: stiffness blocks do not sum to zero";
    else if (!psd) out.note = "hypotheses-not-met: K(sigma) is indefinite at some grid node";
    return out;
}

GroupVelocity group_velocity(const HamiltonianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& sigma, int branch,
                             double step)
{
    if (sigma.size() != spec.nu()) throw InvalidArgument("sigma length does not match the lattice dimension");
    if (branch < 0 || branch >= spec.dof()) throw InvalidArgument("branch index out of range");
    if (!(step > 0.0)) throw InvalidArgument("finite-difference step must be positive");

    GroupVelocity out{false, Eigen::VectorXd(), {}};
    const Eigen::VectorXd lambda = stiffness_eigenvalues(spec, sigma);
    const double lb = lambda(branch);
    const double slack = 1e-10 * (1.0 + lambda.cwiseAbs().maxCoeff());
    if (lb <= slack) {
        out.reason = "branch frequency is zero (square-root kink)";
        return out;
    }
    double gap = std::numeric_limits<double>::infinity();
    if (branch > 0) gap = std::min(gap, lb - lambda(branch - 1));
    if (branch + 1 < lambda.size()) gap = std::min(gap, lambda(branch + 1) - lb);
    if (!(gap > 1e-6 * std::abs(lb))) {
        out.reason = "branch is degenerate (eigenvalue of multiplicity > 1)";
        return out;
    }
    out.velocity.resize(spec.nu());
    for (int a = 0; a < spec.nu(); ++a) {
        Eigen::VectorXd plus = sigma;
        Eigen::VectorXd minus = sigma;
        plus[a] += step;
        minus[a] -= step;
        const double wp = std::sqrt(std::max(0.0, stiffness_eigenvalues(spec, plus)(branch)));
        const double wm = std::sqrt(std::max(0.0, stiffness_eigenvalues(spec, minus)(branch)));
        out.velocity[a] = (wp - wm) / (2.0 * step);
    }
    out.differentiable = true;
    return out;
}

}  // namespace tinet
