#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet carries a value together with its gradient and Hessian with respect to
// the chart coordinates. Arithmetic propagates both through the chain rule, so
// evaluating an expression tree on seeded jets yields exact (to rounding)
// first and second partial derivatives.

#include <Eigen/Dense>

#include <cmath>

#include "errors.hpp"

namespace dihedral {

inline constexpr int kMaxDim = 8;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Jet {
public:
    using Grad = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
    using Hess = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

    Jet() = default;

    /// Constant jet in `dim` variables.
    Jet(double value, int dim) : value_(value), grad_(Grad::Zero(dim)), hess_(Hess::Zero(dim, dim)) {}

    /// The coordinate function x_{index} evaluated at `value`.
    static Jet variable(double value, int index, int dim)
    {
        Jet j(value, dim);
        j.grad_[index] = 1.0;
        return j;
    }

    double value() const noexcept { return value_; }
    const Grad& grad() const noexcept { return grad_; }
    const Hess& hess() const noexcept { return hess_; }
    int dim() const noexcept { return static_cast<int>(grad_.size()); }

    /// Compose with a scalar function given its first two derivatives at value().
    Jet chain(double f, double df, double d2f) const
    {
        Jet r;
        r.value_ = f;
        r.grad_ = df * grad_;
        r.hess_ = df * hess_ + d2f * (grad_ * grad_.transpose());
        return r;
    }

    friend Jet operator+(const Jet& a, const Jet& b)
    {
        Jet r;
        r.value_ = a.value_ + b.value_;
        r.grad_ = a.grad_ + b.grad_;
        r.hess_ = a.hess_ + b.hess_;
        return r;
    }

    friend Jet operator-(const Jet& a, const Jet& b)
    {
        Jet r;
        r.value_ = a.value_ - b.value_;
        r.grad_ = a.grad_ - b.grad_;
        r.hess_ = a.hess_ - b.hess_;
        return r;
    }

    friend Jet operator-(const Jet& a)
    {
        Jet r;
        r.value_ = -a.value_;
        r.grad_ = -a.grad_;
        r.hess_ = -a.hess_;
        return r;
    }

    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r;
        r.value_ = a.value_ * b.value_;
        r.grad_ = a.value_ * b.grad_ + b.value_ * a.grad_;
        r.hess_ = a.value_ * b.hess_ + b.value_ * a.hess_ + a.grad_ * b.grad_.transpose()
            + b.grad_ * a.grad_.transpose();
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b)
    {
        if (b.value_ == 0.0) throw DomainError("division by zero");
        const double v = b.value_;
        return a * b.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    }

private:
    double value_ = 0.0;
    Grad grad_;
    Hess hess_;
};

} // namespace dihedral
