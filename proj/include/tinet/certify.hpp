#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tinet/network.hpp"
#include "tinet/stencil.hpp"

namespace tinet {

/// Supply-rate operator G acting on outputs, S = <u, G y>. In general each
/// block is a polynomial in the time derivative, G_l(s) = sum_p s^p G_l^(p);
/// coefficient p is stored as one stencil of m x r blocks.
class SupplySpec {
public:
    explicit SupplySpec(MatrixStencil g);
    explicit SupplySpec(std::vector<MatrixStencil> coefficients);

    static SupplySpec identity(int nu, int m);
    /// G y = dy/dt, i.e. G(s, sigma) = s I_m.
    static SupplySpec derivative(int nu, int m);

    int nu() const { return coefficients_.front().nu(); }
    int rows() const { return coefficients_.front().rows(); }
    int cols() const { return coefficients_.front().cols(); }
    const std::vector<MatrixStencil>& coefficients() const { return coefficients_; }
    /// Degree-0 part, the plain block-Toeplitz G.
    const MatrixStencil& static_part() const { return coefficients_.front(); }
    /// True when every coefficient beyond the constant one is zero.
    bool is_static() const;

    friend bool operator==(const SupplySpec&, const SupplySpec&) = default;

private:
    std::vector<MatrixStencil> coefficients_;
};

/// Symmetric block-Toeplitz storage operator V with V_{-l} = V_l^T; the
/// storage function is H = 1/2 <x, V x>.
class StorageSpec {
public:
    explicit StorageSpec(MatrixStencil v);

    const MatrixStencil& v() const { return v_; }

    friend bool operator==(const StorageSpec&, const StorageSpec&) = default;

private:
    MatrixStencil v_;
};

/// sum_l exp(-i l.sigma) G_l(s).
ComplexMatrix supply_symbol(const SupplySpec& supply, std::complex<double> s,
                            const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Hermitian (n+m) dissipation matrix
///   [ -A*V - VA     C*G* - VB ]
///   [ GC - B*V      GD + D*G* ]
/// at one spatial frequency. Requires a static supply (UnsupportedForN).
ComplexMatrix dissipation_matrix(const NetworkModel& model, const StorageSpec& storage, const SupplySpec& supply,
                                 const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Same, from symbols already evaluated at sigma.
ComplexMatrix dissipation_matrix(const NetworkSymbols& sym, const ComplexMatrix& v, const ComplexMatrix& g);

/// E(omega, sigma) = F(i omega, sigma)* G* + G F(i omega, sigma), with G taken
/// at s = i omega for polynomial supplies.
ComplexMatrix passivity_matrix(const NetworkModel& model, const SupplySpec& supply, double omega,
                               const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Temporal frequencies checked by the frequency-domain certificates.
struct OmegaSweep {
    std::vector<double> omegas;
    /// Also check the omega -> infinity limit (D-term only).
    bool include_limit = true;
    std::string description;

    /// {0} together with +-logspace(lo, hi, points).
    static OmegaSweep log_symmetric(double lo = 1e-2, double hi = 1e3, int points = 60, bool include_limit = true);
    static OmegaSweep from_points(std::vector<double> omegas, bool include_limit = true);

    /// The omega >= 0 half.
    OmegaSweep nonnegative() const;
};

enum class Property { dissipative, passive, positive_real, negative_imaginary };

std::string to_string(Property property);

struct SideCondition {
    std::string name;
    bool pass;
    std::string detail;
};

struct Witness {
    /// Empty for the frequency-independent dissipativity check; +infinity for
    /// the omega -> infinity limit.
    std::optional<double> omega;
    Eigen::VectorXd sigma;
    double lambda_min;
};

struct CertificationReport {
    Property property;
    bool verdict = false;
    /// min over checked points of lambda_min of the Hermitian matrix that must
    /// be PSD. Empty if a gating side condition stopped the sweep.
    std::optional<double> margin;
    std::optional<Witness> witness;
    TorusGrid grid;
    std::optional<OmegaSweep> sweep;
    std::vector<SideCondition> side_conditions;
    /// Why the verdict is false, when a side condition (not the sweep) decided it.
    std::string reason;
};

/// Per-node PSD slack used when no explicit tolerance is given:
/// 1e-9 * (1 + spectral norm of the checked matrix).
double default_psd_tolerance(const ComplexMatrix& hermitian);

/// Grid-based dissipativity certificate: N(sigma) >= -tol at every node. The
/// per-node PBH controllability of (A(sigma), B(sigma)) is reported as a
/// non-gating side condition.
CertificationReport check_dissipativity(const NetworkModel& model, const StorageSpec& storage,
                                        const SupplySpec& supply, const TorusGrid& grid,
                                        std::optional<double> tol = std::nullopt);

struct StorageTable;

/// Dissipativity with a storage symbol given node-by-node (e.g. from
/// solve_storage) instead of a finite stencil.
CertificationReport check_dissipativity(const NetworkModel& model, const StorageTable& storage,
                                        const SupplySpec& supply, std::optional<double> tol = std::nullopt);

/// Frequency-domain passivity certificate. Requires A(sigma) Hurwitz on the
/// grid; otherwise the verdict is false with no sweep performed.
CertificationReport check_passivity(const NetworkModel& model, const SupplySpec& supply, const TorusGrid& grid,
                                    const OmegaSweep& sweep, std::optional<double> tol = std::nullopt);

/// check_passivity with G = I. Requires r = m.
CertificationReport check_positive_real(const NetworkModel& model, const TorusGrid& grid, const OmegaSweep& sweep,
                                        std::optional<double> tol = std::nullopt);

/// (1/i)(F - F*) <= tol at every node and every omega >= 0 of the sweep.
/// The reported margin is min lambda_min of -(1/i)(F - F*).
CertificationReport check_negative_imaginary(const NetworkModel& model, const TorusGrid& grid,
                                             const OmegaSweep& sweep, std::optional<double> tol = std::nullopt);

/// PBH test: rank [sI - A, B] = n for every eigenvalue s of A, with numerical
/// rank threshold 1e-8 * largest singular value.
bool pbh_controllable(const ComplexMatrix& a, const ComplexMatrix& b);

struct StabilityMargin {
    double mu;                // min over nodes of lambda_min(V(sigma))
    double v_norm;            // max over nodes of ||V(sigma)||
    double condition_number;  // v_norm / mu
    double bound_factor;      // ||x(t)||^2 <= bound_factor ||x(0)||^2 for the isolated network
    Eigen::VectorXd mu_sigma;
    Eigen::VectorXd v_norm_sigma;
};

/// Per-node bounds lower |X|^2 <= X* V(sigma) X / 2 <= upper |X|^2.
struct HamiltonianBounds {
    double lower;  // lambda_min(V(sigma)) / 2
    double upper;  // lambda_max(V(sigma)) / 2
};

struct StorageTable {
    TorusGrid grid;
    std::vector<ComplexMatrix> v;
    StabilityMargin margin;
    std::vector<HamiltonianBounds> bounds;
};

/// Solves A(sigma)* V(sigma) + V(sigma) A(sigma) = -Q(sigma) at every node
/// (Q = I by default). Throws PreconditionViolation unless the model is
/// Hurwitz on the grid, NumericalFailure if a node solve fails or yields a
/// V(sigma) that is not positive definite.
StorageTable solve_storage(const NetworkModel& model, const TorusGrid& grid,
                           const std::optional<MatrixStencil>& q = std::nullopt);

/// mu, ||V|| and condition number of a storage stencil on a grid. mu may be
/// nonpositive, in which case the condition number is +infinity.
StabilityMargin storage_margin(const StorageSpec& storage, const TorusGrid& grid);

}  // namespace tinet
