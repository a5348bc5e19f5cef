#include "tinet/network.hpp"

#include <sstream>

#include "tinet/errors.hpp"

namespace tinet {

NetworkModel::NetworkModel(MatrixStencil a, MatrixStencil b, MatrixStencil c, MatrixStencil d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d))
{
    const int nu = a_.nu();
    if (b_.nu() != nu || c_.nu() != nu || d_.nu() != nu)
        throw InvalidArgument("A, B, C, D stencils must share the lattice dimension nu");
    const int n = a_.rows();
    std::ostringstream msg;
    if (a_.cols() != n)
        msg << "A must be square (got " << a_.rows() << "x" << a_.cols() << ")";
    else if (b_.rows() != n)
        msg << "B must have n = " << n << " rows (got " << b_.rows() << ")";
    else if (c_.cols() != n)
        msg << "C must have n = " << n << " columns (got " << c_.cols() << ")";
    else if (d_.rows() != c_.rows() || d_.cols() != b_.cols())
        msg << "D must be r x m = " << c_.rows() << "x" << b_.cols() << " (got " << d_.rows() << "x" << d_.cols() << ")";
    if (!msg.str().empty()) throw InvalidArgument(msg.str());
}

NetworkModel NetworkModel::autonomous(MatrixStencil a)
{
    const int nu = a.nu();
    const int n = a.rows();
    return NetworkModel(std::move(a), MatrixStencil(nu, n, 1), MatrixStencil(nu, 1, n), MatrixStencil(nu, 1, 1));
}

NetworkSymbols NetworkModel::symbols(const Eigen::Ref<const Eigen::VectorXd>& sigma) const
{
    return {symbol_eval(a_, sigma), symbol_eval(b_, sigma), symbol_eval(c_, sigma), symbol_eval(d_, sigma)};
}

}  // namespace tinet
