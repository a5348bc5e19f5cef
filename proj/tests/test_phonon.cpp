#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "support.hpp"
#include "tinet/errors.hpp"
#include "tinet/models.hpp"
#include "tinet/phonon.hpp"
#include "tinet/spectral.hpp"

using namespace tinet;
using cd = std::complex<double>;
using tinet::testing::matched_distance;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXd at(double x)
{
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

HamiltonianSpec zero_stiffness(int nu, int dof)
{
    return HamiltonianSpec(Eigen::MatrixXd::Identity(dof, dof) * 2.0, MatrixStencil(nu, dof, dof));
}

double laplacian_symbol(double s1, double s2) { return 2.0 * std::cos(s1) + 2.0 * std::cos(s2) - 4.0; }

}  // namespace

TEST(Hamiltonian, ValidatesInputs)
{
    Eigen::MatrixXd bad_mass(1, 1);
    bad_mass << -1.0;
    EXPECT_THROW(HamiltonianSpec(bad_mass, MatrixStencil(1, 1, 1)), InvalidArgument);
    MatrixStencil k(1, 1, 1);
    k.set({1}, Eigen::MatrixXd::Constant(1, 1, 1.0));
    EXPECT_THROW(HamiltonianSpec(Eigen::MatrixXd::Identity(1, 1), k), InvalidArgument);
}

TEST(Hamiltonian, ModelAssembly)
{
    const auto zero = build_hamiltonian_model(zero_stiffness(1, 2));
    ASSERT_EQ(zero.a().blocks().size(), 1u);
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(4, 4);
    want.topRightCorner(2, 2) = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    EXPECT_EQ(zero.a().at({0}), want);

    const auto chain = build_hamiltonian_model(models::chain_spec({}));
    for (double x : {-pi, -0.5, 0.0, 1.2}) {
        Eigen::Matrix2cd a;
        a << 0.0, 1.0, -(2.0 - 2.0 * std::cos(x)), 0.0;
        EXPECT_LT((symbol_eval(chain.a(), at(x)) - a).norm(), 1e-14);
    }

    const auto plate = build_hamiltonian_model(models::plate_spec({2.0, 1.0, 1.0}));
    Eigen::Matrix2cd a0;
    a0 << 0.0, 0.5, 0.0, 0.0;
    EXPECT_LT((symbol_eval(plate.a(), Eigen::Vector2d::Zero()) - a0).norm(), 1e-14);
}

TEST(Dispersion, ZeroStiffness)
{
    const auto surface = dispersion(zero_stiffness(2, 3), TorusGrid(2, 8));
    for (const auto& b : surface.branches) EXPECT_EQ(b.norm(), 0.0);
}

TEST(Dispersion, ChainClosedForm)
{
    const models::ChainParams p{2.0, 3.0, 0.0};
    const TorusGrid grid(1, 128);
    const auto surface = dispersion(models::chain_spec(p), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.node(k)[0];
        EXPECT_NEAR(surface.branches[k][0], 2.0 * std::sqrt(p.kappa / p.mass) * std::abs(std::sin(x / 2.0)), 1e-10);
        EXPECT_TRUE(surface.psd_flags[k]);
    }
    EXPECT_NEAR(stiffness_eigenvalues(models::chain_spec({}), at(pi))[0], 4.0, 1e-14);
}

TEST(Dispersion, PlateCorner)
{
    const auto spec = models::plate_spec({1.0, 2.0, 1.0});
    const TorusGrid grid(2, 16);
    const auto surface = dispersion(spec, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto s = grid.node(k);
        EXPECT_NEAR(surface.branches[k][0], std::abs(laplacian_symbol(s[0], s[1])), 1e-10);
    }
    EXPECT_NEAR(std::sqrt(stiffness_eigenvalues(spec, Eigen::Vector2d(pi, pi))[0]), 8.0, 1e-12);
}

TEST(Dispersion, MatchesStateSpectrum)
{
    // A(sigma) eigenvalues are +-i omega_i(sigma) for every branch.
    std::mt19937 rng(4);
    MatrixStencil k = tinet::testing::random_stencil(rng, 2, 2, 2, 1, 2, 0.3);
    k = compose(k.adjoint(), k);
    k.add({0, 0}, 0.1 * Eigen::MatrixXd::Identity(2, 2));
    Eigen::Matrix2d mass;
    mass << 2.0, 0.3, 0.3, 1.0;
    const HamiltonianSpec spec(mass, k);
    const TorusGrid grid(2, 8);
    const auto surface = dispersion(spec, grid);
    const auto model = build_hamiltonian_model(spec);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const auto eig = state_eigenvalues(symbol_eval(model.a(), grid.node(n)), grid.node(n));
        Eigen::VectorXcd want(4);
        for (int i = 0; i < 2; ++i) {
            want[2 * i] = cd(0.0, surface.branches[n][i]);
            want[2 * i + 1] = cd(0.0, -surface.branches[n][i]);
        }
        EXPECT_LT(matched_distance(eig, want), 1e-9);
    }
}

TEST(Dispersion, FlagsIndefiniteStiffness)
{
    MatrixStencil k(1, 1, 1);
    k.set({0}, Eigen::MatrixXd::Constant(1, 1, -1.0));
    const auto surface = dispersion(HamiltonianSpec(Eigen::MatrixXd::Identity(1, 1), k), TorusGrid(1, 8));
    for (std::size_t i = 0; i < surface.psd_flags.size(); ++i) {
        EXPECT_FALSE(surface.psd_flags[i]);
        EXPECT_EQ(surface.branches[i][0], 0.0);
    }
}

TEST(LongWave, Chain)
{
    const auto report = longwave_analysis(models::chain_spec({}));
    EXPECT_EQ(report.gamma[0][0](0, 0), 2.0);
    EXPECT_NEAR(report.longwave_speed, 1.0, 1e-15);
    EXPECT_EQ(report.sum_zero_residual, 0.0);
}

TEST(LongWave, ZeroAndPlate)
{
    const auto zero = longwave_analysis(zero_stiffness(2, 1));
    EXPECT_EQ(zero.longwave_speed, 0.0);
    const auto plate = longwave_analysis(models::plate_spec({1.0, 3.0, 0.5}));
    for (const auto& row : plate.gamma)
        for (const auto& g : row) EXPECT_LT(g.norm(), 1e-10);
    EXPECT_LT(plate.longwave_speed, 1e-5);
}

TEST(LongWave, SphereSamples)
{
    EXPECT_EQ(unit_sphere_samples(1, 256).size(), 2u);
    for (int nu : {2, 3}) {
        const auto samples = unit_sphere_samples(nu, 256);
        EXPECT_EQ(samples.size(), 256u);
        for (const auto& t : samples) EXPECT_NEAR(t.norm(), 1.0, 1e-14);
    }
}

TEST(PhaseVelocity, ChainLimit)
{
    const auto v = phase_velocity_sup(models::chain_spec({}), TorusGrid(1, 128));
    EXPECT_NEAR(v.value, 1.0, 1e-6);
    EXPECT_TRUE(v.attained_in_limit);
    EXPECT_LT(v.grid_value, 1.0);
    EXPECT_TRUE(v.hypotheses_met);
}

TEST(PhaseVelocity, ZeroStiffnessAndPlate)
{
    EXPECT_EQ(phase_velocity_sup(zero_stiffness(1, 1), TorusGrid(1, 16)).value, 0.0);
    const auto plate = phase_velocity_sup(models::plate_spec({}), TorusGrid(2, 32));
    EXPECT_TRUE(std::isfinite(plate.value));
    EXPECT_FALSE(plate.attained_in_limit);
    EXPECT_GT(plate.value, 0.0);
}

TEST(PhaseVelocity, HypothesesNotMet)
{
    const auto pinned = phase_velocity_sup(models::pinned(models::chain_spec({})), TorusGrid(1, 16));
    EXPECT_FALSE(pinned.hypotheses_met);
    EXPECT_NE(pinned.note.find("hypotheses-not-met"), std::string::npos);
}

TEST(GroupVelocity, ChainValues)
{
    const auto spec = models::chain_spec({});
    const auto g = group_velocity(spec, at(pi / 2.0), 0);
    ASSERT_TRUE(g.differentiable);
    EXPECT_NEAR(g.velocity[0], std::cos(pi / 4.0), 1e-4);
    const auto edge = group_velocity(spec, at(pi), 0);
    ASSERT_TRUE(edge.differentiable);
    EXPECT_NEAR(edge.velocity[0], 0.0, 1e-4);
    EXPECT_FALSE(group_velocity(spec, at(0.0), 0).differentiable);
}

TEST(GroupVelocity, DegenerateBranches)
{
    MatrixStencil k(1, 2, 2);
    k.set({0}, 2.0 * Eigen::MatrixXd::Identity(2, 2));
    k.set({1}, -Eigen::MatrixXd::Identity(2, 2));
    k.set({-1}, -Eigen::MatrixXd::Identity(2, 2));
    const HamiltonianSpec stacked(Eigen::MatrixXd::Identity(2, 2), k);
    const auto g = group_velocity(stacked, at(1.0), 0);
    EXPECT_FALSE(g.differentiable);
    EXPECT_FALSE(g.reason.empty());
}

TEST(Models, PlateStiffness)
{
    const models::PlateParams p{1.0, 2.0, 1.0};
    const auto spec = models::plate_spec(p);
    EXPECT_EQ(spec.stiffness().block_sum()(0, 0), 0.0);
    EXPECT_NEAR(symbol_eval(spec.stiffness(), Eigen::Vector2d(pi, 0.0))(0, 0).real(), 16.0, 1e-12);

    // Independent convolution of the 5-point stencil with itself.
    const auto l = models::laplacian_5pt(p.h);
    MatrixStencil conv(2, 1, 1);
    for (const auto& [a, ba] : l.blocks())
        for (const auto& [b, bb] : l.blocks()) conv.add({a[0] + b[0], a[1] + b[1]}, 0.5 * p.beta * ba * bb);
    EXPECT_EQ(conv.pruned(), spec.stiffness().pruned());

    const TorusGrid grid(2, 64);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto s = grid.node(k);
        const double sl = laplacian_symbol(s[0], s[1]);
        EXPECT_NEAR(symbol_eval(spec.stiffness(), s)(0, 0).real(), 0.5 * p.beta * sl * sl, 1e-12);
    }
}

TEST(Models, PlateSpacingScaling)
{
    const auto a = models::plate_spec({1.0, 1.0, 0.5});
    const auto b = models::plate_spec({1.0, 1.0, 1.0});
    const Eigen::Vector2d s(0.7, -1.9);
    EXPECT_NEAR(symbol_eval(b.stiffness(), s)(0, 0).real(), symbol_eval(a.stiffness(), s)(0, 0).real() / 16.0, 1e-12);
}

TEST(Models, ChainStiffness)
{
    const auto spec = models::chain_spec({1.0, 1.0, 0.0});
    EXPECT_NEAR(symbol_eval(spec.stiffness(), at(pi))(0, 0).real(), 4.0, 1e-14);
    EXPECT_EQ(spec.stiffness().block_sum()(0, 0), 0.0);
    EXPECT_THROW(models::chain_spec({0.0, 1.0, 0.0}), InvalidArgument);
    EXPECT_THROW(models::plate_spec({1.0, -1.0, 1.0}), InvalidArgument);
}

TEST(Models, DampedActuated)
{
    const auto spec = models::pinned(models::chain_spec({}), 0.1);
    EXPECT_THROW(models::damped_actuated(spec, 0.0, models::Sensing::velocity), InvalidArgument);
    const auto lossless = models::actuated_hamiltonian(models::chain_spec({}), 0.0, models::Sensing::velocity);
    EXPECT_FALSE(spectral_abscissa(lossless, TorusGrid(1, 64)).hurwitz);
    const auto damped = models::damped_actuated(spec, 0.5, models::Sensing::velocity);
    EXPECT_TRUE(spectral_abscissa(damped, TorusGrid(1, 64)).hurwitz);
    EXPECT_EQ(damped.m(), 1);
    EXPECT_EQ(damped.r(), 1);
    EXPECT_TRUE(damped.d().is_zero());
}
