#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sphrelax
{

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int Dim>
using Index = std::array<int, Dim>;

/// Base class for every error raised by the library. Messages are meant to be
/// shown to the user verbatim.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid shape construction or query.
class GeometryError : public Error
{
  public:
    using Error::Error;
};

/// Malformed run configuration or input file.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

template <int Dim>
struct BoundingBox
{
    Vec<Dim> lower = Vec<Dim>::Constant(std::numeric_limits<double>::infinity());
    Vec<Dim> upper = Vec<Dim>::Constant(-std::numeric_limits<double>::infinity());

    static BoundingBox everything()
    {
        return {Vec<Dim>::Constant(-std::numeric_limits<double>::infinity()),
                Vec<Dim>::Constant(std::numeric_limits<double>::infinity())};
    }

    bool empty() const { return (lower.array() > upper.array()).any(); }

    void expand(const Vec<Dim> &p)
    {
        lower = lower.cwiseMin(p);
        upper = upper.cwiseMax(p);
    }

    void expand(const BoundingBox &other)
    {
        lower = lower.cwiseMin(other.lower);
        upper = upper.cwiseMax(other.upper);
    }

    BoundingBox padded(double margin) const
    {
        return {lower.array() - margin, upper.array() + margin};
    }

    bool contains(const Vec<Dim> &p) const
    {
        return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
    }

    Vec<Dim> extent() const { return upper - lower; }
};

inline constexpr double pi = std::numbers::pi;

inline double sqr(double x) { return x * x; }

} // namespace sphrelax
