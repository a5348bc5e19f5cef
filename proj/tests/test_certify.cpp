#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "support.hpp"
#include "tinet/certify.hpp"
#include "tinet/errors.hpp"
#include "tinet/models.hpp"
#include "tinet/phonon.hpp"
#include "tinet/spectral.hpp"

using namespace tinet;
using cd = std::complex<double>;
using tinet::testing::random_passive_model;
using tinet::testing::random_stencil;
using tinet::testing::scalar_chain;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXd at(double x)
{
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

NetworkModel d_only(double d)
{
    return NetworkModel(MatrixStencil::identity(1, 1, -1.0), MatrixStencil(1, 1, 1), MatrixStencil(1, 1, 1),
                        MatrixStencil::identity(1, 1, d));
}

NetworkModel spring_mass(double k, double gamma, double output_sign)
{
    MatrixStencil stiffness(1, 1, 1);
    stiffness.set({0}, Eigen::MatrixXd::Constant(1, 1, k));
    const HamiltonianSpec spec(Eigen::MatrixXd::Identity(1, 1), stiffness);
    const auto base = models::actuated_hamiltonian(spec, gamma, models::Sensing::position);
    return NetworkModel(base.a(), base.b(), output_sign * base.c(), base.d());
}

double min_eig(const Eigen::MatrixXcd& h) { return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h).eigenvalues()(0); }

}  // namespace

TEST(Supply, SymbolExamples)
{
    const auto id = SupplySpec::identity(2, 3);
    EXPECT_LT((supply_symbol(id, cd(1.0, 2.0), Eigen::Vector2d(0.3, 1.0)) - Eigen::MatrixXcd::Identity(3, 3)).norm(),
              1e-15);
    const auto der = SupplySpec::derivative(1, 2);
    EXPECT_FALSE(der.is_static());
    EXPECT_LT((supply_symbol(der, cd(0.0, 2.0), at(0.5)) - cd(0.0, 2.0) * Eigen::MatrixXcd::Identity(2, 2)).norm(),
              1e-15);
    MatrixStencil g(1, 1, 1);
    g.set({0}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    g.set({1}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_LT(std::abs(supply_symbol(SupplySpec(g), 0.0, at(pi))(0, 0)), 1e-15);
}

TEST(Storage, RejectsAsymmetricStencil)
{
    MatrixStencil v(1, 1, 1);
    v.set({1}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_THROW(StorageSpec{v}, InvalidArgument);
    v.set({-1}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_NO_THROW(StorageSpec{v});
    EXPECT_THROW(StorageSpec(MatrixStencil(1, 2, 3)), InvalidArgument);
}

TEST(Dissipation, LosslessCollocatedVanishes)
{
    const auto spec = models::plate_spec({1.3, 2.0, 0.7});
    const auto model = models::actuated_hamiltonian(spec, 0.0, models::Sensing::velocity);
    const auto storage = hamiltonian_storage(spec);
    const TorusGrid grid(2, 16);
    for (std::size_t k = 0; k < grid.size(); ++k)
        EXPECT_LT(dissipation_matrix(model, storage, SupplySpec::identity(2, 1), grid.node(k)).norm(), 1e-12);
    const auto report = check_dissipativity(model, storage, SupplySpec::identity(2, 1), grid);
    EXPECT_TRUE(report.verdict);
    EXPECT_NEAR(*report.margin, 0.0, 1e-12);
}

TEST(Dissipation, ScalarChainAssembly)
{
    const auto model = scalar_chain(2.0, 0.5);
    const StorageSpec v(MatrixStencil::identity(1, 1));
    for (double x : {-pi, -1.0, 0.0, 0.4, 2.9}) {
        const auto n = dissipation_matrix(model, v, SupplySpec::identity(1, 1), at(x));
        Eigen::Matrix2cd want = Eigen::Matrix2cd::Zero();
        want(0, 0) = 2.0 * (2.0 - std::cos(x));
        EXPECT_LT((n - want).norm(), 1e-14);
    }
}

TEST(Dissipation, FeedthroughOnly)
{
    const NetworkModel model(MatrixStencil(1, 2, 2), MatrixStencil(1, 2, 2), MatrixStencil(1, 2, 2),
                             MatrixStencil::identity(1, 2));
    const StorageSpec v(MatrixStencil(1, 2, 2));
    const auto n = dissipation_matrix(model, v, SupplySpec::identity(1, 2), at(0.3));
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(4, 4);
    want.bottomRightCorner(2, 2) = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
    EXPECT_LT((n - want).norm(), 1e-15);
}

TEST(Dissipation, RequiresStaticSupply)
{
    const auto model = scalar_chain(2.0, 0.5);
    EXPECT_THROW(dissipation_matrix(model, StorageSpec(MatrixStencil::identity(1, 1)), SupplySpec::derivative(1, 1), at(0.0)),
                 UnsupportedForN);
}

TEST(Dissipation, HermitianAndReflected)
{
    std::mt19937 rng(9);
    const NetworkModel model(random_stencil(rng, 2, 3, 3, 1, 4), random_stencil(rng, 2, 3, 2, 1, 2),
                             random_stencil(rng, 2, 2, 3, 1, 2), random_stencil(rng, 2, 2, 2, 1, 1));
    MatrixStencil vs = random_stencil(rng, 2, 3, 3, 1, 3);
    const StorageSpec v(vs + vs.adjoint());
    const SupplySpec g(random_stencil(rng, 2, 2, 2, 1, 2));
    const TorusGrid grid(2, 8);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto n = dissipation_matrix(model, v, g, grid.node(k));
        EXPECT_EQ((n - n.adjoint()).norm(), 0.0);
        const auto nr = dissipation_matrix(model, v, g, grid.node(grid.reflected(k)));
        EXPECT_LT((nr - n.conjugate()).norm(), 1e-10 * (1.0 + n.norm()));
        for (double w : {0.0, 1.5}) {
            const auto e = passivity_matrix(model, g, w, grid.node(k));
            EXPECT_EQ((e - e.adjoint()).norm(), 0.0);
            const auto er = passivity_matrix(model, g, -w, grid.node(grid.reflected(k)));
            EXPECT_LT((er - e.conjugate()).norm(), 1e-10 * (1.0 + e.norm()));
        }
    }
}

TEST(Dissipativity, ScalarChainVerdicts)
{
    const StorageSpec v(MatrixStencil::identity(1, 1));
    const auto good = check_dissipativity(scalar_chain(2.0, 0.5), v, SupplySpec::identity(1, 1), TorusGrid(1, 64));
    EXPECT_TRUE(good.verdict);
    EXPECT_NEAR(*good.margin, 0.0, 1e-12);

    const auto bad = check_dissipativity(scalar_chain(0.5, 0.5), v, SupplySpec::identity(1, 1), TorusGrid(1, 64));
    EXPECT_FALSE(bad.verdict);
    ASSERT_TRUE(bad.witness.has_value());
    EXPECT_NEAR(bad.witness->sigma[0], 0.0, 1e-15);
    EXPECT_NEAR(bad.witness->lambda_min, -1.0, 1e-10);
    EXPECT_FALSE(bad.witness->omega.has_value());
    EXPECT_EQ(bad.property, Property::dissipative);
}

TEST(Dissipativity, ReportsPbhSideCondition)
{
    const NetworkModel model(MatrixStencil::identity(1, 2, -1.0), MatrixStencil(1, 2, 1), MatrixStencil(1, 1, 2),
                             MatrixStencil(1, 1, 1));
    const auto report = check_dissipativity(model, StorageSpec(MatrixStencil::identity(1, 2)),
                                            SupplySpec::identity(1, 1), TorusGrid(1, 8));
    ASSERT_FALSE(report.side_conditions.empty());
    EXPECT_EQ(report.side_conditions.front().name, "pbh_controllability");
    EXPECT_FALSE(report.side_conditions.front().pass);
    EXPECT_TRUE(report.verdict);
}

TEST(Passivity, MatrixExamples)
{
    for (double w : {-3.0, 0.0, 10.0})
        EXPECT_LT((passivity_matrix(d_only(-1.0), SupplySpec::identity(1, 1), w, at(0.7)) + 2.0 * Eigen::MatrixXcd::Identity(1, 1)).norm(),
                  1e-15);

    const auto chain = scalar_chain(2.0, 0.5);
    for (double w : {-5.0, 0.0, 0.3, 100.0})
        for (double x : {-pi, 0.0, 1.0}) {
            const double g = 2.0 - std::cos(x);
            const double want = 2.0 * g / (g * g + w * w);
            EXPECT_NEAR(passivity_matrix(chain, SupplySpec::identity(1, 1), w, at(x))(0, 0).real(), want, 1e-14);
        }

    Eigen::Matrix2d j;
    j << 0, 1, -1, 0;
    const NetworkModel skew(MatrixStencil::identity(1, 2, -1.0), MatrixStencil(1, 2, 2), MatrixStencil(1, 2, 2),
                            MatrixStencil::constant(1, j));
    EXPECT_EQ(passivity_matrix(skew, SupplySpec::identity(1, 2), 1.0, at(0.2)).norm(), 0.0);
}

TEST(Passivity, ScalarChainStrictOnFiniteSweep)
{
    const auto chain = scalar_chain(2.0, 0.5);
    const auto finite = check_passivity(chain, SupplySpec::identity(1, 1), TorusGrid(1, 64),
                                        OmegaSweep::log_symmetric(1e-2, 1e3, 60, false));
    EXPECT_TRUE(finite.verdict);
    ASSERT_TRUE(finite.margin.has_value());
    EXPECT_GT(*finite.margin, 0.0);
    // closed form minimum over the sweep: omega = 1e3, sigma = 0
    EXPECT_NEAR(*finite.margin, 2.0 / (1.0 + 1e6), 1e-15);

    // With D = 0 the omega -> infinity limit contributes an exactly zero matrix.
    const auto with_limit =
        check_passivity(chain, SupplySpec::identity(1, 1), TorusGrid(1, 64), OmegaSweep::log_symmetric());
    EXPECT_TRUE(with_limit.verdict);
    EXPECT_EQ(*with_limit.margin, 0.0);
    EXPECT_TRUE(std::isinf(*with_limit.witness->omega));
}

TEST(Passivity, HurwitzGate)
{
    const auto spec = models::chain_spec({});
    const auto model = models::actuated_hamiltonian(spec, 0.0, models::Sensing::velocity);
    const auto report = check_passivity(model, SupplySpec::identity(1, 1), TorusGrid(1, 64), OmegaSweep::log_symmetric());
    EXPECT_FALSE(report.verdict);
    EXPECT_EQ(report.reason, "hurwitz side-condition failed");
    EXPECT_FALSE(report.margin.has_value());
    EXPECT_FALSE(report.witness.has_value());
}

TEST(Passivity, NegativeFeedthroughFails)
{
    const auto report = check_passivity(d_only(-1.0), SupplySpec::identity(1, 1), TorusGrid(1, 64), OmegaSweep::log_symmetric());
    EXPECT_FALSE(report.verdict);
    EXPECT_NEAR(*report.margin, -2.0, 1e-12);
    ASSERT_TRUE(report.witness.has_value());
    EXPECT_NEAR(report.witness->lambda_min, -2.0, 1e-12);
}

TEST(PositiveReal, Examples)
{
    EXPECT_TRUE(check_positive_real(scalar_chain(2.0, 0.5), TorusGrid(1, 64), OmegaSweep::log_symmetric()).verdict);

    const NetworkModel wide(MatrixStencil::identity(1, 1, -1.0), MatrixStencil(1, 1, 2), MatrixStencil(1, 1, 1),
                            MatrixStencil(1, 1, 2));
    EXPECT_THROW(check_positive_real(wide, TorusGrid(1, 8), OmegaSweep::log_symmetric()), InvalidArgument);

    const NetworkModel zero(MatrixStencil::identity(1, 2, -1.0), MatrixStencil::constant(1, Eigen::MatrixXd::Ones(2, 1)),
                            MatrixStencil(1, 1, 2), MatrixStencil(1, 1, 1));
    const auto r = check_positive_real(zero, TorusGrid(1, 16), OmegaSweep::log_symmetric());
    EXPECT_TRUE(r.verdict);
    EXPECT_EQ(*r.margin, 0.0);
}

TEST(NegativeImaginary, Examples)
{
    Eigen::Matrix2d sym;
    sym << 1, 2, 2, -3;
    const NetworkModel real(MatrixStencil::identity(1, 2, -1.0), MatrixStencil(1, 2, 2), MatrixStencil(1, 2, 2),
                            MatrixStencil::constant(1, sym));
    const auto r = check_negative_imaginary(real, TorusGrid(1, 16), OmegaSweep::log_symmetric());
    EXPECT_TRUE(r.verdict);
    EXPECT_EQ(*r.margin, 0.0);

    const auto good = check_negative_imaginary(spring_mass(2.0, 0.5, 1.0), TorusGrid(1, 8), OmegaSweep::log_symmetric());
    EXPECT_TRUE(good.verdict);
    const auto bad = check_negative_imaginary(spring_mass(2.0, 0.5, -1.0), TorusGrid(1, 8), OmegaSweep::log_symmetric());
    EXPECT_FALSE(bad.verdict);
    ASSERT_TRUE(bad.witness.has_value());
    EXPECT_GE(*bad.witness->omega, 0.0);
}

TEST(NegativeImaginary, ClosedFormMargin)
{
    // F = 1 / (k - w^2 + i gamma w); -(1/i)(F - F*) = -2 Im F = 2 gamma w / |.|^2
    const double k = 2.0, gamma = 0.5;
    OmegaSweep sweep = OmegaSweep::from_points({0.0, 0.5, 1.0, 4.0});
    const auto r = check_negative_imaginary(spring_mass(k, gamma, 1.0), TorusGrid(1, 4), sweep);
    EXPECT_TRUE(r.verdict);
    EXPECT_NEAR(*r.margin, 0.0, 1e-15);
    const auto t = transfer_function(spring_mass(k, gamma, 1.0), cd(0.0, 1.0), at(0.0));
    EXPECT_LT(std::abs(t(0, 0) - 1.0 / cd(k - 1.0, gamma)), 1e-14);
}

TEST(Pbh, Examples)
{
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 1) = 1.0;
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 1);
    b(1, 0) = 1.0;
    EXPECT_TRUE(pbh_controllable(a, b));
    b(1, 0) = 0.0;
    b(0, 0) = 1.0;
    EXPECT_FALSE(pbh_controllable(a, b));
}

TEST(SolveStorage, MinusIdentity)
{
    const auto table = solve_storage(NetworkModel::autonomous(MatrixStencil::identity(2, 3, -1.0)), TorusGrid(2, 8));
    for (const auto& v : table.v) EXPECT_LT((v - 0.5 * Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-14);
    EXPECT_NEAR(table.margin.mu, 0.5, 1e-14);
    EXPECT_NEAR(table.margin.condition_number, 1.0, 1e-12);
}

TEST(SolveStorage, ScalarChain)
{
    const TorusGrid grid(1, 64);
    const auto table = solve_storage(scalar_chain(2.0, 0.5), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.node(k)[0];
        EXPECT_NEAR(table.v[k](0, 0).real(), 1.0 / (2.0 * (2.0 - std::cos(x))), 1e-10);
    }
    EXPECT_NEAR(table.margin.mu, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(std::abs(table.margin.mu_sigma[0]), pi, 1e-12);
    EXPECT_NEAR(table.margin.v_norm, 0.5, 1e-12);
    EXPECT_NEAR(table.margin.v_norm_sigma[0], 0.0, 1e-12);
    EXPECT_NEAR(table.margin.condition_number, 3.0, 1e-8);
    EXPECT_NEAR(table.bounds[grid.origin()].upper, 0.25, 1e-12);
}

TEST(SolveStorage, LyapunovResidual)
{
    std::mt19937 rng(31);
    const TorusGrid grid(2, 6);
    for (int trial = 0; trial < 5; ++trial) {
        const auto model = random_passive_model(rng, 2, 3, 1);
        const auto table = solve_storage(model, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto a = symbol_eval(model.a(), grid.node(k));
            const Eigen::MatrixXcd res = a.adjoint() * table.v[k] + table.v[k] * a + Eigen::MatrixXcd::Identity(3, 3);
            EXPECT_LT(res.norm(), 1e-10);
            EXPECT_LT((table.v[k] - table.v[k].adjoint()).norm(), 1e-12);
            EXPECT_GT(min_eig(table.v[k]), 0.0);
        }
    }
}

TEST(SolveStorage, RequiresHurwitz)
{
    const auto model = build_hamiltonian_model(models::chain_spec({}));
    EXPECT_THROW(solve_storage(model, TorusGrid(1, 16)), PreconditionViolation);
}

TEST(SolveStorage, CertifiesViaTable)
{
    const TorusGrid grid(1, 64);
    const auto model = scalar_chain(2.0, 0.5);
    const auto table = solve_storage(model, grid);
    // N = [[1, 1 - V], [1 - V, 0]] is indefinite wherever V != 1, so the
    // Lyapunov storage does not certify the identity supply here.
    const auto report = check_dissipativity(model, table, SupplySpec::identity(1, 1));
    EXPECT_FALSE(report.verdict);
    EXPECT_EQ(report.grid, grid);
}

TEST(StorageMargin, StencilMargin)
{
    MatrixStencil v(1, 1, 1);
    v.set({0}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    v.set({1}, Eigen::MatrixXd::Constant(1, 1, 0.25));
    v.set({-1}, Eigen::MatrixXd::Constant(1, 1, 0.25));
    const auto m = storage_margin(StorageSpec(v), TorusGrid(1, 64));
    EXPECT_NEAR(m.mu, 0.5, 1e-14);
    EXPECT_NEAR(m.v_norm, 1.5, 1e-14);
    EXPECT_NEAR(m.condition_number, 3.0, 1e-12);
}

TEST(Properties, RandomPassiveInstances)
{
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        const int nu = 1 + trial % 2;
        const auto model = random_passive_model(rng, nu, 2 + trial % 3, 1 + trial % 2);
        const TorusGrid grid(nu, nu == 1 ? 32 : 12);
        const auto diss = check_dissipativity(model, StorageSpec(MatrixStencil::identity(nu, model.n())),
                                              SupplySpec::identity(nu, model.m()), grid);
        EXPECT_TRUE(diss.verdict);
        const auto pass = check_passivity(model, SupplySpec::identity(nu, model.m()), grid, OmegaSweep::log_symmetric());
        EXPECT_TRUE(pass.verdict) << "trial " << trial << " margin " << pass.margin.value_or(-1);
    }
}
