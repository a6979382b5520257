#pragma once

#include "sphrelax/common.hpp"

namespace sphrelax
{

/**
 * Wendland C2 smoothing kernel with compact support 2h.
 *
 *   W(q) = alpha_d (1 - q/2)^4 (2q + 1),   q = r / h in [0, 2]
 *
 * with alpha_2 = 7 / (4 pi h^2) and alpha_3 = 21 / (16 pi h^3).
 */
template <int Dim>
class WendlandC2
{
    static_assert(Dim == 2 || Dim == 3, "Wendland C2 is provided for 2D and 3D");

  public:
    explicit WendlandC2(double smoothing_length)
        : h_(smoothing_length), inv_h_(1.0 / smoothing_length)
    {
        if (!(smoothing_length > 0.0))
            throw Error("smoothing length must be positive");
        alpha_ = Dim == 2 ? 7.0 / (4.0 * pi * h_ * h_) : 21.0 / (16.0 * pi * h_ * h_ * h_);
    }

    double smoothing_length() const { return h_; }
    double cutoff() const { return 2.0 * h_; }
    double normalization() const { return alpha_; }

    double value(double r) const
    {
        const double q = r * inv_h_;
        if (q >= 2.0)
            return 0.0;
        const double s = 1.0 - 0.5 * q;
        return alpha_ * s * s * s * s * (2.0 * q + 1.0);
    }

    /// dW/dr, non-positive on the support.
    double derivative(double r) const
    {
        const double q = r * inv_h_;
        if (q >= 2.0)
            return 0.0;
        const double s = 1.0 - 0.5 * q;
        return -5.0 * alpha_ * q * s * s * s * inv_h_;
    }

    /// Gradient with respect to the first particle of the separation
    /// rvec = r_i - r_j. Zero at rvec = 0.
    Vec<Dim> gradient(const Vec<Dim> &rvec) const
    {
        const double r = rvec.norm();
        if (r <= 0.0 || r >= 2.0 * h_)
            return Vec<Dim>::Zero();
        return (derivative(r) / r) * rvec;
    }

    /// Same as gradient() when |rvec| = r is already known and 0 < r.
    Vec<Dim> gradient(const Vec<Dim> &rvec, double r) const
    {
        return (derivative(r) / r) * rvec;
    }

  private:
    double h_;
    double inv_h_;
    double alpha_;
};

namespace detail
{
inline void check_kernel_args(double r, double h, int dim)
{
    if (!(h > 0.0))
        throw Error("smoothing length must be positive");
    if (r < 0.0 || std::isnan(r))
        throw Error("kernel distance must be non-negative");
    if (dim != 2 && dim != 3)
        throw Error("kernel dimension must be 2 or 3");
}
} // namespace detail

inline double kernel_value(double r, double h, int dim)
{
    detail::check_kernel_args(r, h, dim);
    return dim == 2 ? WendlandC2<2>(h).value(r) : WendlandC2<3>(h).value(r);
}

template <int Dim>
Vec<Dim> kernel_gradient(const Vec<Dim> &rvec, double h)
{
    return WendlandC2<Dim>(h).gradient(rvec);
}

} // namespace sphrelax
