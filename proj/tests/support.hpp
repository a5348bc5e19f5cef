#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "tinet/certify.hpp"
#include "tinet/network.hpp"
#include "tinet/stencil.hpp"

namespace tinet::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937& rng, int rows, int cols, double scale = 1.0)
{
    std::uniform_real_distribution<double> dist(-scale, scale);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) m(i, k) = dist(rng);
    return m;
}

/// Stencil with `count` distinct random offsets in [-reach, reach]^nu.
inline MatrixStencil random_stencil(std::mt19937& rng, int nu, int rows, int cols, int reach, int count,
                                    double scale = 1.0)
{
    std::uniform_int_distribution<int> off(-reach, reach);
    MatrixStencil s(nu, rows, cols);
    int guard = 0;
    while (static_cast<int>(s.blocks().size()) < count && guard++ < 1000) {
        Offset o(nu);
        for (auto& v : o) v = off(rng);
        if (s.blocks().count(o) == 0) s.set(o, random_matrix(rng, rows, cols, scale));
    }
    return s;
}

/// Minimum-cost perfect matching (Hungarian algorithm, O(n^3)) on |a_i - b_j|;
/// returns the largest matched distance.
inline double matched_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    const int n = static_cast<int>(a.size());
    if (b.size() != n) return std::numeric_limits<double>::infinity();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    auto cost = [&](int i, int j) { return std::abs(a[i - 1] - b[j - 1]); };
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double worst = 0.0;
    for (int j = 1; j <= n; ++j) worst = std::max(worst, cost(p[j], j));
    return worst;
}

/// Dense periodic truncation assembled entry by entry from the definition
/// (T x)_i = sum_l S_l x_{i-l}, used as an oracle for the library's embedding.
inline Eigen::MatrixXd brute_force_circulant(const MatrixStencil& s, int period)
{
    const int nu = s.nu();
    int sites = 1;
    for (int a = 0; a < nu; ++a) sites *= period;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(sites * s.rows(), sites * s.cols());
    auto index_of = [&](const std::vector<int>& k) {
        int idx = 0;
        for (int a = 0; a < nu; ++a) idx = idx * period + ((k[a] % period) + period) % period;
        return idx;
    };
    std::vector<int> i(nu, 0);
    for (int row = 0; row < sites; ++row) {
        int rem = row;
        for (int a = nu - 1; a >= 0; --a) {
            i[a] = rem % period;
            rem /= period;
        }
        for (const auto& [l, block] : s.blocks()) {
            std::vector<int> j(nu);
            for (int a = 0; a < nu; ++a) j[a] = i[a] - l[a];
            t.block(row * s.rows(), index_of(j) * s.cols(), s.rows(), s.cols()) += block;
        }
    }
    return t;
}

/// Random network whose Hamiltonian storage V = I certifies passivity with
/// G = I: A = skew - R with R >= alpha I, C_l = B_{-l}^T, D = PSD + skew.
inline NetworkModel random_passive_model(std::mt19937& rng, int nu, int n, int m, double alpha = 0.2)
{
    MatrixStencil skew = random_stencil(rng, nu, n, n, 1, 3, 0.5);
    MatrixStencil a = skew + (-1.0) * skew.adjoint();
    MatrixStencil r = random_stencil(rng, nu, n, n, 1, 2, 0.3);
    MatrixStencil rr = compose(r.adjoint(), r);
    a += (-1.0) * rr;
    a.add(Offset(nu, 0), -alpha * Eigen::MatrixXd::Identity(n, n));
    MatrixStencil b = random_stencil(rng, nu, n, m, 1, 2);
    MatrixStencil c = b.adjoint();
    const Eigen::MatrixXd p = random_matrix(rng, m, m, 0.5);
    const Eigen::MatrixXd k = random_matrix(rng, m, m, 0.5);
    MatrixStencil d = MatrixStencil::constant(nu, p * p.transpose() + (k - k.transpose()));
    return NetworkModel(std::move(a), std::move(b), std::move(c), std::move(d));
}

/// Scalar chain dx_j/dt = -a x_j + c (x_{j-1} + x_{j+1}) + u_j, y = x.
inline NetworkModel scalar_chain(double a, double c)
{
    MatrixStencil as(1, 1, 1);
    as.set({0}, Eigen::MatrixXd::Constant(1, 1, -a));
    as.set({-1}, Eigen::MatrixXd::Constant(1, 1, c));
    as.set({1}, Eigen::MatrixXd::Constant(1, 1, c));
    return NetworkModel(as, MatrixStencil::identity(1, 1), MatrixStencil::identity(1, 1), MatrixStencil(1, 1, 1));
}

}  // namespace tinet::testing
