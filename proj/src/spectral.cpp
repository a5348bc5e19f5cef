#include "tinet/spectral.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "parallel.hpp"
#include "tinet/errors.hpp"

namespace tinet {

namespace {

bool stencil_vanishes(const MatrixStencil& s) { return s.empty() || s.is_zero(); }

}  // namespace

ComplexMatrix transfer_function(const NetworkSymbols& sym, std::complex<double> s,
                                const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    const auto n = sym.a.rows();
    ComplexMatrix resolvent = s * ComplexMatrix::Identity(n, n) - sym.a;
    Eigen::JacobiSVD<ComplexMatrix> svd(resolvent);
    const auto& sv = svd.singularValues();
    const double smin = sv(n - 1);
    const double condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(condition <= kResolventConditionLimit)) throw ResolventSingular(s, sigma, condition);
    return sym.c * resolvent.partialPivLu().solve(sym.b) + sym.d;
}

ComplexMatrix transfer_function(const NetworkModel& model, std::complex<double> s,
                                const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    if (stencil_vanishes(model.b()) || stencil_vanishes(model.c())) {
        if (sigma.size() != model.nu()) throw InvalidArgument("sigma length does not match the lattice dimension");
        return symbol_eval(model.d(), sigma);
    }
    return transfer_function(model.symbols(sigma), s, sigma);
}

Eigen::VectorXcd state_eigenvalues(const ComplexMatrix& a_symbol, const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a_symbol, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", sigma);
    return solver.eigenvalues();
}

StabilityReport spectral_abscissa(const NetworkModel& model, const TorusGrid& grid)
{
    if (grid.nu() != model.nu()) throw InvalidArgument("grid and model lattice dimensions differ");
    std::vector<double> per_node(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        per_node[i] = state_eigenvalues(symbol_eval(model.a(), sigma), sigma).real().maxCoeff();
    });
    const auto worst = std::max_element(per_node.begin(), per_node.end());
    const auto index = static_cast<std::size_t>(worst - per_node.begin());
    return {grid, *worst, grid.node(index), *worst < -kHurwitzMargin};
}

std::vector<TransferSample> transfer_sweep(const NetworkModel& model, const TorusGrid& grid,
                                           const std::vector<double>& omegas)
{
    std::vector<TransferSample> out(grid.size() * omegas.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        for (std::size_t w = 0; w < omegas.size(); ++w) {
            const std::complex<double> s(0.0, omegas[w]);
            out[i * omegas.size() + w] = {omegas[w], sigma, transfer_function(model, s, sigma)};
        }
    });
    return out;
}

void write_transfer_csv(std::ostream& out, const std::vector<TransferSample>& samples)
{
    if (samples.empty()) return;
    const auto& first = samples.front();
    out << "omega";
    for (Eigen::Index a = 0; a < first.sigma.size(); ++a) out << ",sigma_" << a + 1;
    for (Eigen::Index i = 0; i < first.value.rows(); ++i)
        for (Eigen::Index j = 0; j < first.value.cols(); ++j)
            out << ",re_" << i + 1 << "_" << j + 1 << ",im_" << i + 1 << "_" << j + 1;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (const auto& sample : samples) {
        out << sample.omega;
        for (Eigen::Index a = 0; a < sample.sigma.size(); ++a) out << ',' << sample.sigma[a];
        for (Eigen::Index i = 0; i < sample.value.rows(); ++i)
            for (Eigen::Index j = 0; j < sample.value.cols(); ++j)
                out << ',' << sample.value(i, j).real() << ',' << sample.value(i, j).imag();
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace tinet
