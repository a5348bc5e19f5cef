#pragma once

#include <Eigen/Core>

#include "tinet/stencil.hpp"

namespace tinet {

/// Symbols of the four state-space stencils at one spatial frequency.
struct NetworkSymbols {
    ComplexMatrix a, b, c, d;
};

/// Translation-invariant network dx/dt = A x + B u, y = C x + D u with
/// block-Toeplitz A (n x n), B (n x m), C (r x n), D (r x m) on Z^nu.
class NetworkModel {
public:
    NetworkModel(MatrixStencil a, MatrixStencil b, MatrixStencil c, MatrixStencil d);

    /// Model with only the state matrix; B, C, D are empty stencils with m = r = 1.
    static NetworkModel autonomous(MatrixStencil a);

    int nu() const { return a_.nu(); }
    int n() const { return a_.rows(); }
    int m() const { return b_.cols(); }
    int r() const { return c_.rows(); }

    const MatrixStencil& a() const { return a_; }
    const MatrixStencil& b() const { return b_; }
    const MatrixStencil& c() const { return c_; }
    const MatrixStencil& d() const { return d_; }

    NetworkSymbols symbols(const Eigen::Ref<const Eigen::VectorXd>& sigma) const;

    friend bool operator==(const NetworkModel&, const NetworkModel&) = default;

private:
    MatrixStencil a_, b_, c_, d_;
};

}  // namespace tinet
