#include "tinet/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "parallel.hpp"
#include "tinet/errors.hpp"
#include "tinet/spectral.hpp"

namespace tinet {

namespace {

using cd = std::complex<double>;

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

struct NodeMin {
    double lambda_min = std::numeric_limits<double>::infinity();
    std::optional<double> omega;
    bool violated = false;
};

void record(NodeMin& node, const ComplexMatrix& hermitian, std::optional<double> omega, std::optional<double> tol,
            const Eigen::VectorXd& sigma)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalFailure("Hermitian eigensolver did not converge", sigma);
    const double lmin = eig.eigenvalues()(0);
    const double slack = tol ? *tol : default_psd_tolerance(hermitian);
    if (lmin < -slack) node.violated = true;
    if (lmin < node.lambda_min) {
        node.lambda_min = lmin;
        node.omega = omega;
    }
}

// Reduces per-node minima into the report (first node wins on ties).
void reduce(CertificationReport& report, const std::vector<NodeMin>& nodes)
{
    std::size_t best = 0;
    bool violated = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        violated = violated || nodes[i].violated;
        if (nodes[i].lambda_min < nodes[best].lambda_min) best = i;
    }
    report.margin = nodes[best].lambda_min;
    report.witness = Witness{nodes[best].omega, report.grid.node(best), nodes[best].lambda_min};
    report.verdict = !violated;
}

bool vanishes(const MatrixStencil& s) { return s.empty() || s.is_zero(); }

ComplexMatrix transfer_at(const NetworkModel& model, const NetworkSymbols& sym, cd s, const Eigen::VectorXd& sigma)
{
    if (vanishes(model.b()) || vanishes(model.c())) return sym.d;
    return transfer_function(sym, s, sigma);
}

std::string describe_sigma(const Eigen::VectorXd& sigma) { return "sigma = " + format_vector(sigma); }

// Hurwitz gate shared by the frequency-domain certificates. Returns false and
// fills the report when the gate fails.
bool hurwitz_gate(CertificationReport& report, const NetworkModel& model, const TorusGrid& grid)
{
    const StabilityReport stab = spectral_abscissa(model, grid);
    std::ostringstream detail;
    detail.precision(17);
    detail << "spectral abscissa " << stab.abscissa << " at " << describe_sigma(stab.worst_sigma);
    report.side_conditions.push_back({"hurwitz", stab.hurwitz, detail.str()});
    if (!stab.hurwitz) {
        report.verdict = false;
        report.reason = "hurwitz side-condition failed";
    }
    return stab.hurwitz;
}

void check_grid(const NetworkModel& model, const TorusGrid& grid)
{
    if (grid.nu() != model.nu()) throw InvalidArgument("grid and model lattice dimensions differ");
}

void check_supply_shape(const NetworkModel& model, const SupplySpec& supply)
{
    if (supply.nu() != model.nu() || supply.rows() != model.m() || supply.cols() != model.r()) {
        std::ostringstream msg;
        msg << "supply must be m x r = " << model.m() << "x" << model.r() << " on nu = " << model.nu();
        throw InvalidArgument(msg.str());
    }
}

CertificationReport frequency_sweep(Property property, const NetworkModel& model, const SupplySpec* supply,
                                    const TorusGrid& grid, const OmegaSweep& sweep, std::optional<double> tol)
{
    CertificationReport report{property, false, std::nullopt, std::nullopt, grid, sweep, {}, {}};
    if (!hurwitz_gate(report, model, grid)) return report;

    const bool negative_imaginary = property == Property::negative_imaginary;
    const bool with_limit = sweep.include_limit && (negative_imaginary || supply->is_static());
    if (sweep.include_limit && !with_limit)
        report.side_conditions.push_back(
            {"omega_limit", true, "omega -> infinity limit skipped: polynomial supply grows without bound"});

    std::vector<NodeMin> nodes(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        const NetworkSymbols sym = model.symbols(sigma);
        for (double omega : sweep.omegas) {
            const ComplexMatrix f = transfer_at(model, sym, cd(0.0, omega), sigma);
            if (negative_imaginary) {
                // -(1/i)(F - F*) must be PSD
                record(nodes[i], hermitian_part(cd(0.0, 1.0) * (f - f.adjoint())), omega, tol, sigma);
            } else {
                const ComplexMatrix g = supply_symbol(*supply, cd(0.0, omega), sigma);
                record(nodes[i], hermitian_part(f.adjoint() * g.adjoint() + g * f), omega, tol, sigma);
            }
        }
        if (with_limit) {
            const double inf = std::numeric_limits<double>::infinity();
            if (negative_imaginary) {
                record(nodes[i], hermitian_part(cd(0.0, 1.0) * (sym.d - sym.d.adjoint())), inf, tol, sigma);
            } else {
                const ComplexMatrix g = symbol_eval(supply->static_part(), sigma);
                record(nodes[i], hermitian_part(g * sym.d + sym.d.adjoint() * g.adjoint()), inf, tol, sigma);
            }
        }
    });
    reduce(report, nodes);
    return report;
}

SideCondition controllability_condition(const NetworkModel& model, const TorusGrid& grid)
{
    std::vector<char> ok(grid.size(), 1);
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        ok[i] = pbh_controllable(symbol_eval(model.a(), sigma), symbol_eval(model.b(), sigma)) ? 1 : 0;
    });
    const auto failures = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
    std::ostringstream detail;
    if (failures == 0) {
        detail << "(A(sigma), B(sigma)) controllable at all " << grid.size() << " nodes";
    } else {
        const auto first = static_cast<std::size_t>(std::find(ok.begin(), ok.end(), 0) - ok.begin());
        detail << "uncontrollable at " << failures << " of " << grid.size() << " nodes, first at "
               << describe_sigma(grid.node(first)) << "; dissipativity verdict remains sufficient only";
    }
    return {"pbh_controllability", failures == 0, detail.str()};
}

}  // namespace

SupplySpec::SupplySpec(MatrixStencil g) : coefficients_{std::move(g)} {}

SupplySpec::SupplySpec(std::vector<MatrixStencil> coefficients) : coefficients_(std::move(coefficients))
{
    if (coefficients_.empty()) throw InvalidArgument("supply needs at least one coefficient stencil");
    const auto& first = coefficients_.front();
    for (const auto& c : coefficients_)
        if (c.nu() != first.nu() || c.rows() != first.rows() || c.cols() != first.cols())
            throw InvalidArgument("supply polynomial coefficients must share shape and lattice dimension");
}

SupplySpec SupplySpec::identity(int nu, int m) { return SupplySpec(MatrixStencil::identity(nu, m)); }

SupplySpec SupplySpec::derivative(int nu, int m)
{
    return SupplySpec(std::vector<MatrixStencil>{MatrixStencil(nu, m, m), MatrixStencil::identity(nu, m)});
}

bool SupplySpec::is_static() const
{
    return std::all_of(coefficients_.begin() + 1, coefficients_.end(), [](const auto& c) { return vanishes(c); });
}

StorageSpec::StorageSpec(MatrixStencil v) : v_(std::move(v))
{
    if (v_.rows() != v_.cols()) throw InvalidArgument("storage stencil blocks must be square");
    double scale = 0.0;
    for (const auto& [offset, block] : v_.blocks()) scale = std::max(scale, block.cwiseAbs().maxCoeff());
    const MatrixStencil adj = v_.adjoint();
    for (const auto& [offset, block] : v_.blocks()) {
        if ((block - adj.at(offset)).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
            Eigen::VectorXd l(offset.size());
            for (std::size_t a = 0; a < offset.size(); ++a) l[a] = offset[a];
            throw InvalidArgument("storage stencil violates V_{-l} = V_l^T at offset " + format_vector(l));
        }
    }
}

ComplexMatrix supply_symbol(const SupplySpec& supply, cd s, const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    const auto& coeffs = supply.coefficients();
    // Horner in s
    ComplexMatrix value = symbol_eval(coeffs.back(), sigma);
    for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) value = s * value + symbol_eval(*it, sigma);
    return value;
}

ComplexMatrix dissipation_matrix(const NetworkSymbols& sym, const ComplexMatrix& v, const ComplexMatrix& g)
{
    const auto n = sym.a.rows();
    const auto m = sym.b.cols();
    ComplexMatrix out(n + m, n + m);
    out.topLeftCorner(n, n) = -sym.a.adjoint() * v - v * sym.a;
    out.topRightCorner(n, m) = sym.c.adjoint() * g.adjoint() - v * sym.b;
    out.bottomLeftCorner(m, n) = g * sym.c - sym.b.adjoint() * v;
    out.bottomRightCorner(m, m) = g * sym.d + sym.d.adjoint() * g.adjoint();
    return hermitian_part(out);
}

ComplexMatrix dissipation_matrix(const NetworkModel& model, const StorageSpec& storage, const SupplySpec& supply,
                                 const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    if (!supply.is_static())
        throw UnsupportedForN("dissipation matrix N(sigma) is defined only for a static (degree-0) supply");
    check_supply_shape(model, supply);
    if (storage.v().nu() != model.nu() || storage.v().rows() != model.n())
        throw InvalidArgument("storage must be n x n on the model lattice");
    return dissipation_matrix(model.symbols(sigma), symbol_eval(storage.v(), sigma),
                              symbol_eval(supply.static_part(), sigma));
}

ComplexMatrix passivity_matrix(const NetworkModel& model, const SupplySpec& supply, double omega,
                               const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    check_supply_shape(model, supply);
    const ComplexMatrix f = transfer_function(model, cd(0.0, omega), sigma);
    const ComplexMatrix g = supply_symbol(supply, cd(0.0, omega), sigma);
    return hermitian_part(f.adjoint() * g.adjoint() + g * f);
}

OmegaSweep OmegaSweep::log_symmetric(double lo, double hi, int points, bool include_limit)
{
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw InvalidArgument("omega sweep needs 0 < lo < hi and at least 2 points");
    OmegaSweep sweep;
    sweep.omegas.reserve(2 * points + 1);
    sweep.omegas.push_back(0.0);
    const double step = (std::log10(hi) - std::log10(lo)) / (points - 1);
    for (int k = 0; k < points; ++k) {
        const double w = std::pow(10.0, std::log10(lo) + k * step);
        sweep.omegas.push_back(w);
        sweep.omegas.push_back(-w);
    }
    sweep.include_limit = include_limit;
    std::ostringstream d;
    d << "{0} U +-logspace(" << lo << ", " << hi << ", " << points << ")" << (include_limit ? " U {inf}" : "");
    sweep.description = d.str();
    return sweep;
}

OmegaSweep OmegaSweep::from_points(std::vector<double> omegas, bool include_limit)
{
    OmegaSweep sweep;
    sweep.omegas = std::move(omegas);
    sweep.include_limit = include_limit;
    sweep.description = std::to_string(sweep.omegas.size()) + " explicit points" + (include_limit ? " U {inf}" : "");
    return sweep;
}

OmegaSweep OmegaSweep::nonnegative() const
{
    OmegaSweep out;
    std::copy_if(omegas.begin(), omegas.end(), std::back_inserter(out.omegas), [](double w) { return w >= 0.0; });
    out.include_limit = include_limit;
    out.description = description + ", omega >= 0";
    return out;
}

std::string to_string(Property property)
{
    switch (property) {
        case Property::dissipative: return "dissipative";
        case Property::passive: return "passive";
        case Property::positive_real: return "positive_real";
        case Property::negative_imaginary: return "negative_imaginary";
    }
    return "unknown";
}

double default_psd_tolerance(const ComplexMatrix& hermitian)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian, Eigen::EigenvaluesOnly);
    return 1e-9 * (1.0 + eig.eigenvalues().cwiseAbs().maxCoeff());
}

bool pbh_controllable(const ComplexMatrix& a, const ComplexMatrix& b)
{
    const auto n = a.rows();
    const Eigen::VectorXcd eigenvalues = state_eigenvalues(a, Eigen::VectorXd());
    ComplexMatrix pencil(n, n + b.cols());
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        pencil.leftCols(n) = eigenvalues[k] * ComplexMatrix::Identity(n, n) - a;
        pencil.rightCols(b.cols()) = b;
        Eigen::JacobiSVD<ComplexMatrix> svd(pencil);
        const auto& sv = svd.singularValues();
        if (sv(0) == 0.0) return false;
        const double threshold = 1e-8 * sv(0);
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > threshold) ++rank;
        if (rank < n) return false;
    }
    return true;
}

CertificationReport check_dissipativity(const NetworkModel& model, const StorageSpec& storage,
                                        const SupplySpec& supply, const TorusGrid& grid, std::optional<double> tol)
{
    check_grid(model, grid);
    if (!supply.is_static())
        throw UnsupportedForN("dissipativity check needs a static supply; use check_passivity for polynomial G(s)");
    check_supply_shape(model, supply);
    if (storage.v().nu() != model.nu() || storage.v().rows() != model.n())
        throw InvalidArgument("storage must be n x n on the model lattice");

    CertificationReport report{Property::dissipative, false, std::nullopt, std::nullopt, grid, std::nullopt, {}, {}};
    report.side_conditions.push_back(controllability_condition(model, grid));
    std::vector<NodeMin> nodes(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        const ComplexMatrix n_sigma = dissipation_matrix(model.symbols(sigma), symbol_eval(storage.v(), sigma),
                                                         symbol_eval(supply.static_part(), sigma));
        record(nodes[i], n_sigma, std::nullopt, tol, sigma);
    });
    reduce(report, nodes);
    return report;
}

CertificationReport check_dissipativity(const NetworkModel& model, const StorageTable& storage,
                                        const SupplySpec& supply, std::optional<double> tol)
{
    const TorusGrid& grid = storage.grid;
    check_grid(model, grid);
    if (!supply.is_static()) throw UnsupportedForN("dissipativity check needs a static supply");
    check_supply_shape(model, supply);
    if (storage.v.size() != grid.size()) throw InvalidArgument("storage table does not cover its grid");

    CertificationReport report{Property::dissipative, false, std::nullopt, std::nullopt, grid, std::nullopt, {}, {}};
    report.side_conditions.push_back(controllability_condition(model, grid));
    std::vector<NodeMin> nodes(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        record(nodes[i],
               dissipation_matrix(model.symbols(sigma), storage.v[i], symbol_eval(supply.static_part(), sigma)),
               std::nullopt, tol, sigma);
    });
    reduce(report, nodes);
    return report;
}

CertificationReport check_passivity(const NetworkModel& model, const SupplySpec& supply, const TorusGrid& grid,
                                    const OmegaSweep& sweep, std::optional<double> tol)
{
    check_grid(model, grid);
    check_supply_shape(model, supply);
    return frequency_sweep(Property::passive, model, &supply, grid, sweep, tol);
}

CertificationReport check_positive_real(const NetworkModel& model, const TorusGrid& grid, const OmegaSweep& sweep,
                                        std::optional<double> tol)
{
    if (model.r() != model.m()) throw InvalidArgument("positive-real check requires r = m");
    check_grid(model, grid);
    const SupplySpec identity = SupplySpec::identity(model.nu(), model.m());
    return frequency_sweep(Property::positive_real, model, &identity, grid, sweep, tol);
}

CertificationReport check_negative_imaginary(const NetworkModel& model, const TorusGrid& grid,
                                             const OmegaSweep& sweep, std::optional<double> tol)
{
    if (model.r() != model.m()) throw InvalidArgument("negative-imaginary check requires r = m");
    check_grid(model, grid);
    return frequency_sweep(Property::negative_imaginary, model, nullptr, grid, sweep.nonnegative(), tol);
}

StorageTable solve_storage(const NetworkModel& model, const TorusGrid& grid, const std::optional<MatrixStencil>& q)
{
    check_grid(model, grid);
    const int n = model.n();
    const MatrixStencil q_stencil = q ? *q : MatrixStencil::identity(model.nu(), n);
    if (q_stencil.nu() != model.nu() || q_stencil.rows() != n || q_stencil.cols() != n)
        throw InvalidArgument("Q must be n x n on the model lattice");

    const StabilityReport stab = spectral_abscissa(model, grid);
    if (!stab.hurwitz) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "Lyapunov storage requires a Hurwitz state symbol; spectral abscissa " << stab.abscissa << " at "
            << describe_sigma(stab.worst_sigma);
        throw PreconditionViolation(msg.str());
    }

    StorageTable table{grid, std::vector<ComplexMatrix>(grid.size()), {}, std::vector<HamiltonianBounds>(grid.size())};
    std::vector<double> lmin(grid.size()), lmax(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const Eigen::VectorXd sigma = grid.node(i);
        const ComplexMatrix a = symbol_eval(model.a(), sigma);
        const ComplexMatrix qs = symbol_eval(q_stencil, sigma);
        const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
        // vec(A* V + V A) = (I kron A* + A^T kron I) vec(V)
        ComplexMatrix op(n * n, n * n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) op.block(r * n, c * n, n, n) = eye(r, c) * a.adjoint() + a(c, r) * eye;
        Eigen::PartialPivLU<ComplexMatrix> lu(op);
        const Eigen::VectorXcd rhs = -Eigen::Map<const Eigen::VectorXcd>(qs.data(), n * n);
        const Eigen::VectorXcd vec = lu.solve(rhs);
        if (!vec.allFinite()) throw NumericalFailure("Lyapunov solve failed", sigma);
        const ComplexMatrix v = hermitian_part(Eigen::Map<const ComplexMatrix>(vec.data(), n, n));
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(v, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0.0))
            throw NumericalFailure("Lyapunov solution is not positive definite", sigma);
        table.v[i] = v;
        lmin[i] = eig.eigenvalues()(0);
        lmax[i] = eig.eigenvalues()(n - 1);
        table.bounds[i] = {0.5 * lmin[i], 0.5 * lmax[i]};
    });

    const auto mu_it = std::min_element(lmin.begin(), lmin.end());
    const auto norm_it = std::max_element(lmax.begin(), lmax.end());
    auto& margin = table.margin;
    margin.mu = *mu_it;
    margin.v_norm = *norm_it;
    margin.condition_number = margin.v_norm / margin.mu;
    margin.bound_factor = margin.condition_number;
    margin.mu_sigma = grid.node(static_cast<std::size_t>(mu_it - lmin.begin()));
    margin.v_norm_sigma = grid.node(static_cast<std::size_t>(norm_it - lmax.begin()));
    return table;
}

StabilityMargin storage_margin(const StorageSpec& storage, const TorusGrid& grid)
{
    if (grid.nu() != storage.v().nu()) throw InvalidArgument("grid and storage lattice dimensions differ");
    std::vector<double> lmin(grid.size()), vnorm(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const ComplexMatrix v = hermitian_part(symbol_eval(storage.v(), grid.node(i)));
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(v, Eigen::EigenvaluesOnly);
        lmin[i] = eig.eigenvalues()(0);
        vnorm[i] = eig.eigenvalues().cwiseAbs().maxCoeff();
    });
    const auto mu_it = std::min_element(lmin.begin(), lmin.end());
    const auto norm_it = std::max_element(vnorm.begin(), vnorm.end());
    StabilityMargin margin;
    margin.mu = *mu_it;
    margin.v_norm = *norm_it;
    margin.condition_number =
        margin.mu > 0.0 ? margin.v_norm / margin.mu : std::numeric_limits<double>::infinity();
    margin.bound_factor = margin.condition_number;
    margin.mu_sigma = grid.node(static_cast<std::size_t>(mu_it - lmin.begin()));
    margin.v_norm_sigma = grid.node(static_cast<std::size_t>(norm_it - vnorm.begin()));
    return margin;
}

}  // namespace tinet
