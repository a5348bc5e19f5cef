#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Core>

namespace tinet {

using Offset = std::vector<int>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Finitely supported map from lattice offsets in Z^nu to equally shaped
/// real matrix blocks. Absent offsets stand for zero blocks.
///
/// The stencil describes the block-Toeplitz operator (S x)_j = sum_k S_{j-k} x_k
/// and its symbol sum_l exp(-i l.sigma) S_l on the torus [-pi, pi)^nu.
class MatrixStencil {
public:
    using BlockMap = std::map<Offset, Eigen::MatrixXd>;

    MatrixStencil(int nu, int rows, int cols);

    static MatrixStencil identity(int nu, int size, double scale = 1.0);
    /// Single block at the origin.
    static MatrixStencil constant(int nu, const Eigen::MatrixXd& block);

    int nu() const { return nu_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const BlockMap& blocks() const { return blocks_; }
    bool empty() const { return blocks_.empty(); }

    /// Replaces the block at `offset`.
    MatrixStencil& set(const Offset& offset, const Eigen::MatrixXd& block);
    /// Adds `block` to whatever is stored at `offset`.
    MatrixStencil& add(const Offset& offset, const Eigen::MatrixXd& block);

    /// Block at `offset`, zero if absent.
    Eigen::MatrixXd at(const Offset& offset) const;

    /// True if every stored block is exactly zero.
    bool is_zero() const;

    /// Largest |l_a| over stored offsets, per axis.
    std::vector<int> max_offset_magnitude() const;

    /// Sum of all blocks, i.e. the symbol at sigma = 0.
    Eigen::MatrixXd block_sum() const;

    /// Stencil of the adjoint operator: blocks T_l = S_{-l}^T.
    MatrixStencil adjoint() const;

    /// Drops stored blocks that are exactly zero.
    MatrixStencil pruned() const;

    MatrixStencil& operator+=(const MatrixStencil& other);
    MatrixStencil& operator*=(double alpha);

    friend bool operator==(const MatrixStencil& a, const MatrixStencil& b);

private:
    void check_offset(const Offset& offset) const;
    void check_block(const Eigen::MatrixXd& block) const;

    int nu_;
    int rows_;
    int cols_;
    BlockMap blocks_;
};

MatrixStencil operator+(MatrixStencil a, const MatrixStencil& b);
MatrixStencil operator*(double alpha, MatrixStencil s);

/// Operator composition (a * b)_l = sum_j a_{l-j} b_j; its symbol is the
/// product of the symbols.
MatrixStencil compose(const MatrixStencil& a, const MatrixStencil& b);

/// Uniform sampling of the torus [-pi, pi)^nu with nodes -pi + 2 pi k / P.
class TorusGrid {
public:
    TorusGrid(int nu, int points_per_axis);

    /// P = 64 for nu <= 2, P = 16 for nu = 3 (and beyond).
    static TorusGrid default_for(int nu);

    int nu() const { return nu_; }
    int points_per_axis() const { return points_; }
    std::size_t size() const { return size_; }

    /// Multi-index of node `index`; the first axis varies slowest.
    std::vector<int> multi_index(std::size_t index) const;
    Eigen::VectorXd node(std::size_t index) const;
    /// Index of the node at -sigma (mod 2 pi).
    std::size_t reflected(std::size_t index) const;
    /// Index of sigma = 0.
    std::size_t origin() const;

    friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
    int nu_;
    int points_;
    std::size_t size_;
};

/// sum_l exp(-i l.sigma) block_l.
ComplexMatrix symbol_eval(const MatrixStencil& stencil, const Eigen::Ref<const Eigen::VectorXd>& sigma);

/// Grid estimate of the L2-induced operator norm: max over nodes of the
/// largest singular value of the symbol. A lower bound of the true ess-sup.
double operator_norm(const MatrixStencil& stencil, const TorusGrid& grid);

/// Periodic truncation with period L per axis, as a dense
/// (L^nu rows) x (L^nu cols) block-circulant matrix. Sites are ordered with
/// the first axis varying slowest.
Eigen::MatrixXd circulant_embed(const MatrixStencil& stencil, int period);

/// Throws InvalidArgument naming the first offset with 2 |l_a| >= L.
void check_period(const MatrixStencil& stencil, int period);

}  // namespace tinet
