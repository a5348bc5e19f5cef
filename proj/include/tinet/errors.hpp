#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tinet {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold (e.g. a
/// non-Hurwitz model handed to the Lyapunov storage solver).
class PreconditionViolation : public Error {
public:
    using Error::Error;
};

/// Polynomial-in-s supply passed where only a static supply makes sense.
class UnsupportedForN : public Error {
public:
    using Error::Error;
};

/// sI - A(sigma) is singular or too badly conditioned to solve with.
class ResolventSingular : public Error {
public:
    ResolventSingular(std::complex<double> s, Eigen::VectorXd sigma, double condition);

    std::complex<double> s() const { return s_; }
    const Eigen::VectorXd& sigma() const { return sigma_; }
    double condition() const { return condition_; }

private:
    std::complex<double> s_;
    Eigen::VectorXd sigma_;
    double condition_;
};

/// An eigen/linear solver failed at a particular spatial frequency.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, Eigen::VectorXd sigma);

    const Eigen::VectorXd& sigma() const { return sigma_; }

private:
    Eigen::VectorXd sigma_;
};

/// The time integrator produced a non-finite state.
class Divergence : public Error {
public:
    explicit Divergence(double time);

    double time() const { return time_; }

private:
    double time_;
};

std::string format_vector(const Eigen::VectorXd& v);

}  // namespace tinet
