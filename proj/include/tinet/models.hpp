#pragma once

#include <vector>

#include "tinet/network.hpp"
#include "tinet/phonon.hpp"

namespace tinet::models {

/// Finite-difference Kirchhoff-Love plate: density, bending stiffness, grid step.
struct PlateParams {
    double rho = 1.0;
    double beta = 1.0;
    double h = 1.0;
};

/// Monatomic nearest-neighbour spring-mass chain.
struct ChainParams {
    double mass = 1.0;
    double kappa = 1.0;
    double gamma = 0.0;
};

enum class Sensing { velocity, position };

/// 5-point Laplacian {0: -4/h^2, (+-1,0): 1/h^2, (0,+-1): 1/h^2}.
MatrixStencil laplacian_5pt(double h);

/// M = rho, K = (beta/2) L^2 with L the 5-point Laplacian (nu = 2, n = 2).
HamiltonianSpec plate_spec(const PlateParams& params);

/// M = m, K = {0: 2 kappa, +-1: -kappa} (nu = 1, n = 2).
HamiltonianSpec chain_spec(const ChainParams& params);

/// Adds eps I to K_0 so that K(0) > 0.
HamiltonianSpec pinned(const HamiltonianSpec& spec, double eps = 0.1);

/// Collocated force actuation and sensing on a Hamiltonian network with
/// momentum damping dp/dt = ... - gamma M^{-1} p. B injects force into the
/// selected p components at l = 0; C reads M^{-1} p (velocity) or q
/// (position) of the same components; D = 0. `actuated` lists position
/// coordinates, empty for all of them. gamma = 0 gives the lossless network.
NetworkModel actuated_hamiltonian(const HamiltonianSpec& spec, double gamma, Sensing sensing,
                                  const std::vector<int>& actuated = {});

/// actuated_hamiltonian with gamma > 0 enforced.
NetworkModel damped_actuated(const HamiltonianSpec& spec, double gamma, Sensing sensing,
                             const std::vector<int>& actuated = {});

}  // namespace tinet::models
