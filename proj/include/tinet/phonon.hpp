#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tinet/certify.hpp"
#include "tinet/network.hpp"

namespace tinet {

/// Isolated spring-mass network with state x_k = (q_k, p_k) and Hamiltonian
///   H = 1/2 sum_j ( p_j^T M^{-1} p_j + q_j^T sum_k K_{j-k} q_k ).
class HamiltonianSpec {
public:
    HamiltonianSpec(Eigen::MatrixXd mass, MatrixStencil stiffness);

    int nu() const { return stiffness_.nu(); }
    /// Number of position coordinates per site (n / 2).
    int dof() const { return static_cast<int>(mass_.rows()); }
    const Eigen::MatrixXd& mass() const { return mass_; }
    const MatrixStencil& stiffness() const { return stiffness_; }
    const Eigen::MatrixXd& mass_inverse() const { return mass_inverse_; }
    /// M^{-1/2}
    const Eigen::MatrixXd& mass_inverse_sqrt() const { return mass_inverse_sqrt_; }

    friend bool operator==(const HamiltonianSpec& a, const HamiltonianSpec& b)
    {
        return a.mass_ == b.mass_ && a.stiffness_ == b.stiffness_;
    }

private:
    Eigen::MatrixXd mass_;
    MatrixStencil stiffness_;
    Eigen::MatrixXd mass_inverse_;
    Eigen::MatrixXd mass_inverse_sqrt_;
};

/// A_l = J V_l: top-right M^{-1} at the origin, bottom-left -K_l. B, C, D are
/// empty (m = r = 1).
NetworkModel build_hamiltonian_model(const HamiltonianSpec& spec);

/// Storage stencil V_l = diag(K_l, delta_{0l} M^{-1}) whose quadratic form is
/// the Hamiltonian.
StorageSpec hamiltonian_storage(const HamiltonianSpec& spec);

struct DispersionSurface {
    TorusGrid grid;
    /// branches[node] holds the n/2 frequencies sqrt(lambda_i), ascending.
    std::vector<Eigen::VectorXd> branches;
    /// Raw eigenvalues of M^{-1/2} K(sigma) M^{-1/2}, ascending.
    std::vector<Eigen::VectorXd> eigenvalues;
    /// False where K(sigma) has an eigenvalue below -tol; the frequency is
    /// then reported as 0.
    std::vector<bool> psd_flags;
};

/// Eigenvalues of M^{-1/2} K(sigma) M^{-1/2} at one frequency, ascending.
Eigen::VectorXd stiffness_eigenvalues(const HamiltonianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Dispersion branches omega_i(sigma) on the grid. Negative eigenvalues above
/// -tol are clamped to zero; the default tol is 1e-10 (1 + ||K(sigma)||).
DispersionSurface dispersion(const HamiltonianSpec& spec, const TorusGrid& grid,
                             std::optional<double> tol = std::nullopt);

struct LongWaveReport {
    /// gamma[j][k] = -sum_l l_j l_k K_l
    std::vector<std::vector<Eigen::MatrixXd>> gamma;
    /// max over sampled unit theta of sqrt(1/2 lambda_max(sum theta_j theta_k Gamma_jk M^{-1}))
    double longwave_speed;
    /// ||sum_l K_l||
    double sum_zero_residual;
    /// sum_l |l|^2 ||K_l||
    double second_moment;
    /// Smallest eigenvalue of sum theta_j theta_k Gamma_jk over the samples.
    double min_directional_eigenvalue;
    std::size_t sphere_samples;
};

/// Unit directions used for the long-wave maximum: {+1, -1} for nu = 1,
/// equally spaced angles for nu = 2, a Fibonacci lattice for nu >= 3.
std::vector<Eigen::VectorXd> unit_sphere_samples(int nu, std::size_t count);

LongWaveReport longwave_analysis(const HamiltonianSpec& spec, std::size_t sphere_samples = 256);

struct PhaseVelocity {
    /// max(grid_value, longwave_speed)
    double value;
    double grid_value;
    double longwave_speed;
    /// Grid node attaining grid_value.
    Eigen::VectorXd grid_witness;
    /// True when the sup is the sigma -> 0 limit rather than a grid node.
    bool attained_in_limit;
    /// Zero-sum stiffness and PSD K(sigma) on the grid.
    bool hypotheses_met;
    std::string note;
};

/// sup of omega / |sigma| over nonzero grid nodes, combined with the analytic
/// long-wave limit.
PhaseVelocity phase_velocity_sup(const HamiltonianSpec& spec, const TorusGrid& grid,
                                 std::size_t sphere_samples = 256);

struct GroupVelocity {
    bool differentiable;
    Eigen::VectorXd velocity;
    std::string reason;
};

/// Central finite-difference gradient of branch `branch` at sigma. Reports a
/// non-differentiable branch when it is not simple (relative gap <= 1e-6) or
/// sits at omega = 0.
GroupVelocity group_velocity(const HamiltonianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& sigma,
                             int branch, double step = 1e-5);

}  // namespace tinet
