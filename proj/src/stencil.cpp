#include "tinet/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "parallel.hpp"
#include "tinet/errors.hpp"

namespace tinet {

MatrixStencil::MatrixStencil(int nu, int rows, int cols) : nu_(nu), rows_(rows), cols_(cols)
{
    if (nu < 1) throw InvalidArgument("stencil lattice dimension nu must be positive");
    if (rows < 1 || cols < 1) throw InvalidArgument("stencil block shape must be positive");
}

MatrixStencil MatrixStencil::identity(int nu, int size, double scale)
{
    MatrixStencil s(nu, size, size);
    s.set(Offset(nu, 0), scale * Eigen::MatrixXd::Identity(size, size));
    return s;
}

MatrixStencil MatrixStencil::constant(int nu, const Eigen::MatrixXd& block)
{
    MatrixStencil s(nu, static_cast<int>(block.rows()), static_cast<int>(block.cols()));
    s.set(Offset(nu, 0), block);
    return s;
}

void MatrixStencil::check_offset(const Offset& offset) const
{
    if (static_cast<int>(offset.size()) != nu_) {
        std::ostringstream msg;
        msg << "offset has length " << offset.size() << ", expected nu = " << nu_;
        throw InvalidArgument(msg.str());
    }
}

void MatrixStencil::check_block(const Eigen::MatrixXd& block) const
{
    if (block.rows() != rows_ || block.cols() != cols_) {
        std::ostringstream msg;
        msg << "stencil block is " << block.rows() << "x" << block.cols() << ", expected " << rows_ << "x" << cols_;
        throw InvalidArgument(msg.str());
    }
}

MatrixStencil& MatrixStencil::set(const Offset& offset, const Eigen::MatrixXd& block)
{
    check_offset(offset);
    check_block(block);
    blocks_[offset] = block;
    return *this;
}

MatrixStencil& MatrixStencil::add(const Offset& offset, const Eigen::MatrixXd& block)
{
    check_offset(offset);
    check_block(block);
    auto [it, inserted] = blocks_.try_emplace(offset, block);
    if (!inserted) it->second += block;
    return *this;
}

Eigen::MatrixXd MatrixStencil::at(const Offset& offset) const
{
    check_offset(offset);
    auto it = blocks_.find(offset);
    if (it == blocks_.end()) return Eigen::MatrixXd::Zero(rows_, cols_);
    return it->second;
}

bool MatrixStencil::is_zero() const
{
    return std::all_of(blocks_.begin(), blocks_.end(), [](const auto& kv) { return (kv.second.array() == 0.0).all(); });
}

std::vector<int> MatrixStencil::max_offset_magnitude() const
{
    std::vector<int> out(nu_, 0);
    for (const auto& [offset, block] : blocks_)
        for (int a = 0; a < nu_; ++a) out[a] = std::max(out[a], std::abs(offset[a]));
    return out;
}

Eigen::MatrixXd MatrixStencil::block_sum() const
{
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows_, cols_);
    for (const auto& [offset, block] : blocks_) sum += block;
    return sum;
}

MatrixStencil MatrixStencil::adjoint() const
{
    MatrixStencil out(nu_, cols_, rows_);
    for (const auto& [offset, block] : blocks_) {
        Offset neg(offset);
        for (int& v : neg) v = -v;
        out.blocks_[neg] = block.transpose();
    }
    return out;
}

MatrixStencil MatrixStencil::pruned() const
{
    MatrixStencil out(nu_, rows_, cols_);
    for (const auto& [offset, block] : blocks_)
        if (!(block.array() == 0.0).all()) out.blocks_.emplace(offset, block);
    return out;
}

MatrixStencil& MatrixStencil::operator+=(const MatrixStencil& other)
{
    if (other.nu_ != nu_ || other.rows_ != rows_ || other.cols_ != cols_)
        throw InvalidArgument("cannot add stencils of different shape or lattice dimension");
    for (const auto& [offset, block] : other.blocks_) add(offset, block);
    return *this;
}

MatrixStencil& MatrixStencil::operator*=(double alpha)
{
    for (auto& [offset, block] : blocks_) block *= alpha;
    return *this;
}

bool operator==(const MatrixStencil& a, const MatrixStencil& b)
{
    if (a.nu_ != b.nu_ || a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    if (a.blocks_.size() != b.blocks_.size()) return false;
    auto it = b.blocks_.begin();
    for (const auto& [offset, block] : a.blocks_) {
        if (offset != it->first || block != it->second) return false;
        ++it;
    }
    return true;
}

MatrixStencil operator+(MatrixStencil a, const MatrixStencil& b)
{
    a += b;
    return a;
}

MatrixStencil operator*(double alpha, MatrixStencil s)
{
    s *= alpha;
    return s;
}

MatrixStencil compose(const MatrixStencil& a, const MatrixStencil& b)
{
    if (a.nu() != b.nu()) throw InvalidArgument("cannot compose stencils on lattices of different dimension");
    if (a.cols() != b.rows()) throw InvalidArgument("inner block dimensions of composed stencils do not agree");
    MatrixStencil out(a.nu(), a.rows(), b.cols());
    for (const auto& [la, blk_a] : a.blocks()) {
        for (const auto& [lb, blk_b] : b.blocks()) {
            Offset sum(la);
            for (int i = 0; i < a.nu(); ++i) sum[i] += lb[i];
            out.add(sum, blk_a * blk_b);
        }
    }
    return out;
}

TorusGrid::TorusGrid(int nu, int points_per_axis) : nu_(nu), points_(points_per_axis), size_(1)
{
    if (nu < 1) throw InvalidArgument("torus grid dimension nu must be positive");
    if (points_per_axis < 2) throw InvalidArgument("torus grid needs at least 2 points per axis");
    for (int a = 0; a < nu; ++a) size_ *= static_cast<std::size_t>(points_per_axis);
}

TorusGrid TorusGrid::default_for(int nu) { return TorusGrid(nu, nu <= 2 ? 64 : 16); }

std::vector<int> TorusGrid::multi_index(std::size_t index) const
{
    std::vector<int> k(nu_);
    for (int a = nu_ - 1; a >= 0; --a) {
        k[a] = static_cast<int>(index % points_);
        index /= points_;
    }
    return k;
}

Eigen::VectorXd TorusGrid::node(std::size_t index) const
{
    const auto k = multi_index(index);
    Eigen::VectorXd sigma(nu_);
    for (int a = 0; a < nu_; ++a) sigma[a] = -std::numbers::pi + 2.0 * std::numbers::pi * k[a] / points_;
    return sigma;
}

std::size_t TorusGrid::reflected(std::size_t index) const
{
    // sigma_k = -pi + 2 pi k / P, so -sigma_k corresponds to k' = P - k (mod P).
    const auto k = multi_index(index);
    std::size_t out = 0;
    for (int a = 0; a < nu_; ++a) out = out * points_ + static_cast<std::size_t>((points_ - k[a]) % points_);
    return out;
}

std::size_t TorusGrid::origin() const
{
    if (points_ % 2 != 0) throw InvalidArgument("sigma = 0 is a grid node only for even points_per_axis");
    std::size_t out = 0;
    for (int a = 0; a < nu_; ++a) out = out * points_ + static_cast<std::size_t>(points_ / 2);
    return out;
}

ComplexMatrix symbol_eval(const MatrixStencil& stencil, const Eigen::Ref<const Eigen::VectorXd>& sigma)
{
    if (sigma.size() != stencil.nu()) {
        std::ostringstream msg;
        msg << "sigma has length " << sigma.size() << ", expected nu = " << stencil.nu();
        throw InvalidArgument(msg.str());
    }
    ComplexMatrix value = ComplexMatrix::Zero(stencil.rows(), stencil.cols());
    for (const auto& [offset, block] : stencil.blocks()) {
        double phase = 0.0;
        for (int a = 0; a < stencil.nu(); ++a) phase += offset[a] * sigma[a];
        value += std::polar(1.0, -phase) * block.cast<std::complex<double>>();
    }
    return value;
}

double operator_norm(const MatrixStencil& stencil, const TorusGrid& grid)
{
    if (grid.nu() != stencil.nu()) throw InvalidArgument("grid and stencil lattice dimensions differ");
    if (stencil.empty()) return 0.0;
    std::vector<double> per_node(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        Eigen::JacobiSVD<ComplexMatrix> svd(symbol_eval(stencil, grid.node(i)));
        per_node[i] = svd.singularValues()(0);
    });
    return *std::max_element(per_node.begin(), per_node.end());
}

void check_period(const MatrixStencil& stencil, int period)
{
    if (period < 1) throw InvalidArgument("period must be positive");
    for (const auto& [offset, block] : stencil.blocks()) {
        for (int a = 0; a < stencil.nu(); ++a) {
            if (2 * std::abs(offset[a]) >= period) {
                Eigen::VectorXd l(stencil.nu());
                for (int b = 0; b < stencil.nu(); ++b) l[b] = offset[b];
                std::ostringstream msg;
                msg << "period " << period << " too small for stencil offset " << format_vector(l)
                    << ": need L > 2 |l_a| on every axis";
                throw InvalidArgument(msg.str());
            }
        }
    }
}

Eigen::MatrixXd circulant_embed(const MatrixStencil& stencil, int period)
{
    check_period(stencil, period);
    const int nu = stencil.nu();
    const int rows = stencil.rows();
    const int cols = stencil.cols();
    std::size_t count = 1;
    for (int a = 0; a < nu; ++a) count *= static_cast<std::size_t>(period);

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(count * rows, count * cols);
    for (std::size_t k = 0; k < count; ++k) {
        // multi-index of site k
        std::size_t rem = k;
        std::vector<int> kk(nu);
        for (int a = nu - 1; a >= 0; --a) {
            kk[a] = static_cast<int>(rem % period);
            rem /= period;
        }
        for (const auto& [offset, block] : stencil.blocks()) {
            std::size_t row_site = 0;
            for (int a = 0; a < nu; ++a) {
                const int ja = ((kk[a] + offset[a]) % period + period) % period;
                row_site = row_site * period + static_cast<std::size_t>(ja);
            }
            dense.block(row_site * rows, k * cols, rows, cols) += block;
        }
    }
    return dense;
}

}  // namespace tinet
