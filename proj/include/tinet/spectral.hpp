#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "tinet/network.hpp"

namespace tinet {

/// Resolvents with a condition estimate above this are treated as singular.
inline constexpr double kResolventConditionLimit = 1e12;
/// Hurwitz means every eigenvalue real part is below -kHurwitzMargin.
inline constexpr double kHurwitzMargin = 1e-9;

/// F(s, sigma) = C(sigma) (sI - A(sigma))^{-1} B(sigma) + D(sigma).
///
/// Models whose B or C stencil is identically zero return D(sigma) without
/// touching the resolvent. Throws ResolventSingular when sI - A(sigma) has a
/// condition number above kResolventConditionLimit.
ComplexMatrix transfer_function(const NetworkModel& model, std::complex<double> s,
                                const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Same, from precomputed symbols.
ComplexMatrix transfer_function(const NetworkSymbols& symbols, std::complex<double> s,
                                const Eigen::Ref<const Eigen::VectorXd>& sigma);

struct StabilityReport {
    TorusGrid grid;
    double abscissa;              // max over nodes of max Re spectrum(A(sigma))
    Eigen::VectorXd worst_sigma;  // node attaining the abscissa
    bool hurwitz;                 // abscissa < -kHurwitzMargin
};

/// Grid-based spectral abscissa of the state symbol. Throws NumericalFailure
/// if the eigensolver does not converge at a node.
StabilityReport spectral_abscissa(const NetworkModel& model, const TorusGrid& grid);

/// Eigenvalues of A(sigma), throwing NumericalFailure on non-convergence.
Eigen::VectorXcd state_eigenvalues(const ComplexMatrix& a_symbol, const Eigen::Ref<const Eigen::VectorXd>& sigma);

struct TransferSample {
    double omega;
    Eigen::VectorXd sigma;
    ComplexMatrix value;
};

/// F(i omega, sigma) for every omega in `omegas` and every grid node, ordered
/// node-major.
std::vector<TransferSample> transfer_sweep(const NetworkModel& model, const TorusGrid& grid,
                                           const std::vector<double>& omegas);

/// CSV with columns omega, sigma_1..sigma_nu, then re/im pairs of F row-major.
void write_transfer_csv(std::ostream& out, const std::vector<TransferSample>& samples);

}  // namespace tinet
