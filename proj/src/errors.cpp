#include "tinet/errors.hpp"

#include <sstream>

namespace tinet {

std::string format_vector(const Eigen::VectorXd& v)
{
    std::ostringstream out;
    out.precision(17);
    out << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        out << v[i];
    }
    out << ')';
    return out.str();
}

namespace {

std::string resolvent_message(std::complex<double> s, const Eigen::VectorXd& sigma, double condition)
{
    std::ostringstream out;
    out.precision(17);
    out << "resolvent sI - A(sigma) is singular at s = " << s.real() << (s.imag() < 0 ? " - " : " + ")
        << std::abs(s.imag()) << "i, sigma = " << format_vector(sigma) << " (condition estimate " << condition << ")";
    return out.str();
}

std::string divergence_message(double t)
{
    std::ostringstream out;
    out << "integration diverged: non-finite state at t = " << t;
    return out.str();
}

}  // namespace

ResolventSingular::ResolventSingular(std::complex<double> s, Eigen::VectorXd sigma, double condition)
    : Error(resolvent_message(s, sigma, condition)), s_(s), sigma_(std::move(sigma)), condition_(condition)
{
}

NumericalFailure::NumericalFailure(const std::string& what, Eigen::VectorXd sigma)
    : Error(what + " at sigma = " + format_vector(sigma)), sigma_(std::move(sigma))
{
}

Divergence::Divergence(double time) : Error(divergence_message(time)), time_(time) {}

}  // namespace tinet
