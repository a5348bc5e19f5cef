#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tinet/certify.hpp"
#include "tinet/network.hpp"
#include "tinet/phonon.hpp"

namespace tinet {

/// Discrete Fourier transform over the periodic lattice (Z/L)^nu with the
/// symbol sign convention X_k = sum_j exp(-i j.sigma_k) x_j, sigma_k = 2 pi k / L.
/// Vectors hold `block` consecutive components per site, sites ordered with
/// the first axis varying slowest.
class LatticeDft {
public:
    LatticeDft(int nu, int period);

    int nu() const { return nu_; }
    int period() const { return period_; }
    std::size_t sites() const { return sites_; }
    /// Multi-index of site (or frequency) `index`.
    std::vector<int> multi_index(std::size_t index) const;
    /// sigma_k = 2 pi k / L per axis.
    Eigen::VectorXd frequency(std::size_t index) const;

    Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXcd>& x, int block) const;
    Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& x, int block) const;
    /// x_j = L^{-nu} sum_k exp(i j.sigma_k) X_k
    Eigen::VectorXcd inverse(const Eigen::Ref<const Eigen::VectorXcd>& x, int block) const;

private:
    void apply(Eigen::VectorXcd& data, int block, const Eigen::MatrixXcd& kernel) const;

    int nu_;
    int period_;
    std::size_t sites_;
    Eigen::MatrixXcd forward_kernel_;
    Eigen::MatrixXcd inverse_kernel_;
};

/// Sparse block-circulant realization of a stencil with period L; equal to
/// circulant_embed but without forming the dense matrix.
Eigen::SparseMatrix<double> circulant_sparse(const MatrixStencil& stencil, int period);

/// The network on the periodic lattice (Z/L)^nu.
class TruncatedNetwork {
public:
    TruncatedNetwork(NetworkModel model, int period);

    const NetworkModel& model() const { return model_; }
    int period() const { return period_; }
    std::size_t sites() const { return sites_; }
    std::size_t state_size() const { return sites_ * model_.n(); }
    std::size_t input_size() const { return sites_ * model_.m(); }
    std::size_t output_size() const { return sites_ * model_.r(); }

    const Eigen::SparseMatrix<double>& a() const { return a_; }
    const Eigen::SparseMatrix<double>& b() const { return b_; }
    const Eigen::SparseMatrix<double>& c() const { return c_; }
    const Eigen::SparseMatrix<double>& d() const { return d_; }
    /// Grid estimate of ||A||_inf used by the step-size check.
    double a_norm() const { return a_norm_; }

private:
    NetworkModel model_;
    int period_;
    std::size_t sites_;
    Eigen::SparseMatrix<double> a_, b_, c_, d_;
    double a_norm_;
};

/// u(t) on the whole truncated lattice (sites * m values).
using InputSignal = std::function<Eigen::VectorXd(double)>;

namespace inputs {

InputSignal zero(std::size_t size);
/// pattern * sin^2(pi t / width) on [0, width], zero afterwards.
InputSignal pulse(Eigen::VectorXd pattern, double width);
/// pattern * sin(omega t)
InputSignal sine(Eigen::VectorXd pattern, double omega);
/// u_j(t) = Re(exp(i omega t + i j.sigma_k) z) for a circulant frequency k.
InputSignal plane_wave(const LatticeDft& lattice, const std::vector<int>& k_index, Eigen::VectorXcd z, double omega);
/// Linear interpolation of samples u(i dt), held constant past the last one.
InputSignal sampled(std::vector<Eigen::VectorXd> samples, double dt);

}  // namespace inputs

struct SimulationOptions {
    /// Enables H(t) and dH/dt.
    std::optional<StorageSpec> storage;
    /// Enables S(t) and the cumulative work W(t). Must be static.
    std::optional<SupplySpec> supply;
    bool record_states = true;
    /// Record every k-th step (the final step is always recorded).
    std::size_t sample_every = 1;
};

struct SimulationTrace {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> inputs;
    std::vector<Eigen::VectorXd> outputs;
    std::vector<double> state_norm, input_norm, output_norm;
    /// Present when a storage is configured.
    std::vector<double> hamiltonian, hamiltonian_rate;
    /// Present when a supply is configured.
    std::vector<double> supply_rate, work;
    /// Present when both are configured: S - dH/dt from the lattice
    /// quantities, and the same number from the dissipation matrix applied
    /// to the lattice Fourier transform of (x, u).
    std::vector<double> dissipation_residual, dissipation_form;
};

/// Fixed-step RK4 on the truncated network. dH/dt is evaluated from the
/// right-hand side, W by carrying dW/dt = S through the same RK4 stages.
/// Throws InvalidArgument if dt * ||A|| >= 0.5 and Divergence on a
/// non-finite state.
SimulationTrace integrate(const TruncatedNetwork& network, const Eigen::Ref<const Eigen::VectorXd>& x0,
                          const InputSignal& input, double t_end, double dt, const SimulationOptions& options = {});

/// Per-frequency input U(t, sigma_k), one vector per circulant frequency.
using SpectralInput = std::function<std::vector<Eigen::VectorXcd>(double)>;

/// Lattice DFT of a real-space input.
SpectralInput spectral_input(const LatticeDft& lattice, InputSignal input, int m);

struct SpectralTrace {
    std::vector<double> times;
    /// states[sample][k], outputs[sample][k]
    std::vector<std::vector<Eigen::VectorXcd>> states;
    std::vector<std::vector<Eigen::VectorXcd>> outputs;
};

/// Integrates dX/dt = A(sigma_k) X + B(sigma_k) U independently at every
/// circulant frequency sigma_k = 2 pi k / L with the same RK4 scheme as
/// integrate().
SpectralTrace spectral_integrate(const NetworkModel& model, int period, const std::vector<Eigen::VectorXcd>& x0,
                                 const SpectralInput& input, double t_end, double dt, std::size_t sample_every = 1);

/// Inverse lattice DFT of a per-frequency sample (values at all k) into a
/// real-space vector; the imaginary part is dropped.
Eigen::VectorXd to_lattice(const LatticeDft& lattice, const std::vector<Eigen::VectorXcd>& per_node);

struct PlaneWaveReport {
    Eigen::VectorXd sigma;
    std::complex<double> eigenvalue;
    Eigen::VectorXcd eigenvector;
    double eigen_residual;
    /// max over samples of ||x_simulated - x_analytic||_2 / amplitude.
    double residual;
};

/// Plane wave x_j(t) = amplitude Re(exp(s t + i j.sigma) z) for the
/// eigenpair (s, z) of A(sigma) with the `branch`-th smallest nonnegative
/// imaginary part, checked against integrate(). Throws PreconditionViolation
/// if s is not purely imaginary (within 1e-9 (1 + |s|)).
PlaneWaveReport plane_wave_check(const NetworkModel& model, int period, const std::vector<int>& k_index, int branch,
                                 double amplitude, double t_end, double dt);

PlaneWaveReport phonon_wave_check(const HamiltonianSpec& spec, int period, const std::vector<int>& k_index,
                                  int branch, double amplitude, double t_end, double dt);

}  // namespace tinet
