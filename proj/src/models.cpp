#include "tinet/models.hpp"

#include "tinet/errors.hpp"

namespace tinet::models {

MatrixStencil laplacian_5pt(double h)
{
    if (!(h > 0.0)) throw InvalidArgument("grid spacing h must be positive");
    const double w = 1.0 / (h * h);
    MatrixStencil l(2, 1, 1);
    l.set({0, 0}, Eigen::MatrixXd::Constant(1, 1, -4.0 * w));
    for (const Offset& off : {Offset{1, 0}, Offset{-1, 0}, Offset{0, 1}, Offset{0, -1}})
        l.set(off, Eigen::MatrixXd::Constant(1, 1, w));
    return l;
}

HamiltonianSpec plate_spec(const PlateParams& params)
{
    if (!(params.rho > 0.0) || !(params.beta > 0.0) || !(params.h > 0.0))
        throw InvalidArgument("plate parameters rho, beta, h must be strictly positive");
    const MatrixStencil l = laplacian_5pt(params.h);
    return HamiltonianSpec(Eigen::MatrixXd::Constant(1, 1, params.rho), 0.5 * params.beta * compose(l, l));
}

HamiltonianSpec chain_spec(const ChainParams& params)
{
    if (!(params.mass > 0.0) || !(params.kappa > 0.0)) throw InvalidArgument("chain mass and kappa must be positive");
    MatrixStencil k(1, 1, 1);
    k.set({0}, Eigen::MatrixXd::Constant(1, 1, 2.0 * params.kappa));
    k.set({-1}, Eigen::MatrixXd::Constant(1, 1, -params.kappa));
    k.set({1}, Eigen::MatrixXd::Constant(1, 1, -params.kappa));
    return HamiltonianSpec(Eigen::MatrixXd::Constant(1, 1, params.mass), std::move(k));
}

HamiltonianSpec pinned(const HamiltonianSpec& spec, double eps)
{
    MatrixStencil k = spec.stiffness();
    k.add(Offset(spec.nu(), 0), eps * Eigen::MatrixXd::Identity(spec.dof(), spec.dof()));
    return HamiltonianSpec(spec.mass(), std::move(k));
}

NetworkModel actuated_hamiltonian(const HamiltonianSpec& spec, double gamma, Sensing sensing,
                                  const std::vector<int>& actuated)
{
    if (gamma < 0.0) throw InvalidArgument("damping gamma must be nonnegative");
    const int h = spec.dof();
    const int nu = spec.nu();
    std::vector<int> components = actuated;
    if (components.empty())
        for (int i = 0; i < h; ++i) components.push_back(i);
    const int m = static_cast<int>(components.size());
    Eigen::MatrixXd select = Eigen::MatrixXd::Zero(h, m);
    for (int j = 0; j < m; ++j) {
        if (components[j] < 0 || components[j] >= h) throw InvalidArgument("actuated component out of range");
        select(components[j], j) = 1.0;
    }

    MatrixStencil a = build_hamiltonian_model(spec).a();
    Eigen::MatrixXd damping = Eigen::MatrixXd::Zero(2 * h, 2 * h);
    damping.bottomRightCorner(h, h) = -gamma * spec.mass_inverse();
    if (gamma > 0.0) a.add(Offset(nu, 0), damping);

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * h, m);
    b.bottomRows(h) = select;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, 2 * h);
    if (sensing == Sensing::velocity)
        c.rightCols(h) = select.transpose() * spec.mass_inverse();
    else
        c.leftCols(h) = select.transpose();

    return NetworkModel(std::move(a), MatrixStencil::constant(nu, b), MatrixStencil::constant(nu, c),
                        MatrixStencil(nu, m, m));
}

NetworkModel damped_actuated(const HamiltonianSpec& spec, double gamma, Sensing sensing,
                             const std::vector<int>& actuated)
{
    if (!(gamma > 0.0)) throw InvalidArgument("damped_actuated requires gamma > 0");
    return actuated_hamiltonian(spec, gamma, sensing, actuated);
}

}  // namespace tinet::models
