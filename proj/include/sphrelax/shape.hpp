#pragma once

#include "sphrelax/common.hpp"
#include "sphrelax/polygon.hpp"
#include "sphrelax/trimesh.hpp"

#include <memory>
#include <type_traits>
#include <variant>
#include <vector>

namespace sphrelax
{

template <int Dim>
struct Ball
{
    Vec<Dim> center;
    double radius;
};

template <int Dim>
struct Box
{
    Vec<Dim> lower;
    Vec<Dim> upper;
};

/// Interior is { p : normal . p < offset }, normal has unit length.
template <int Dim>
struct HalfSpace
{
    Vec<Dim> normal;
    double offset;
};

template <int Dim>
class Shape;

/// Outer minus the union of the inner shapes.
template <int Dim>
struct Subtraction
{
    std::shared_ptr<const Shape<Dim>> outer;
    std::vector<Shape<Dim>> inner;
};

/// Free-form boundary representation: polygons in 2D, triangle meshes in 3D.
template <int Dim>
using Freeform = std::conditional_t<Dim == 2, Polygon, TriMesh>;

template <int Dim>
using ShapeNode = std::variant<Ball<Dim>, Box<Dim>, HalfSpace<Dim>, Freeform<Dim>, Subtraction<Dim>>;

/**
 * Immutable geometry handle answering signed-distance queries (negative
 * inside). Copies share the underlying description.
 */
template <int Dim>
class Shape
{
  public:
    /// Empty handle; every query on it throws.
    Shape() = default;

    bool empty() const { return !node_; }

    static Shape ball(const Vec<Dim> &center, double radius)
    {
        if (!(radius > 0.0) || !center.allFinite())
            throw GeometryError("ball radius must be positive");
        return Shape(Ball<Dim>{center, radius});
    }

    static Shape box(const Vec<Dim> &lower, const Vec<Dim> &upper)
    {
        if (!(upper.array() > lower.array()).all() || !lower.allFinite() || !upper.allFinite())
            throw GeometryError("box needs upper > lower on every axis");
        return Shape(Box<Dim>{lower, upper});
    }

    static Shape half_space(const Vec<Dim> &normal, double offset)
    {
        const double n = normal.norm();
        if (!(n > 0.0) || !std::isfinite(offset))
            throw GeometryError("half-space normal must be non-zero");
        return Shape(HalfSpace<Dim>{normal / n, offset / n});
    }

    static Shape freeform(Freeform<Dim> boundary) { return Shape(std::move(boundary)); }

    static Shape subtract(const Shape &outer, std::vector<Shape> inner)
    {
        for (std::size_t k = 0; k < inner.size(); ++k)
        {
            if (std::holds_alternative<HalfSpace<Dim>>(inner[k].node()))
                throw GeometryError("an unbounded shape cannot be subtracted");
            for (const auto &q : inner[k].surface_samples())
                if (!(outer.signed_distance(q) < 0.0))
                    throw GeometryError("inner shape " + std::to_string(k) +
                                        " is not strictly inside the outer shape");
        }
        return Shape(Subtraction<Dim>{std::make_shared<const Shape>(outer), std::move(inner)});
    }

    const ShapeNode<Dim> &node() const
    {
        if (!node_)
            throw GeometryError("empty shape");
        return *node_;
    }

    template <class T>
    const T *as() const
    {
        return node_ ? std::get_if<T>(node_.get()) : nullptr;
    }

    double signed_distance(const Vec<Dim> &p) const
    {
        return std::visit([&](const auto &s) { return distance_to(s, p); }, node());
    }

    bool contains(const Vec<Dim> &p) const { return signed_distance(p) < 0.0; }

    /// Bounding box of the zero level set. Axes along which the surface is
    /// unbounded (half spaces) are reported as infinite.
    BoundingBox<Dim> surface_bounds() const
    {
        return std::visit([&](const auto &s) { return bounds_of(s); }, node());
    }

    /// Points lying on the surface, used for containment validation.
    std::vector<Vec<Dim>> surface_samples() const
    {
        return std::visit([&](const auto &s) { return samples_of(s); }, node());
    }

  private:
    explicit Shape(ShapeNode<Dim> node) : node_(std::make_shared<const ShapeNode<Dim>>(std::move(node))) {}

    static double distance_to(const Ball<Dim> &b, const Vec<Dim> &p) { return (p - b.center).norm() - b.radius; }

    static double distance_to(const Box<Dim> &b, const Vec<Dim> &p)
    {
        const Vec<Dim> center = 0.5 * (b.lower + b.upper);
        const Vec<Dim> half = 0.5 * (b.upper - b.lower);
        const Vec<Dim> q = (p - center).cwiseAbs() - half;
        const double outside = q.cwiseMax(Vec<Dim>::Zero()).norm();
        const double inside = std::min(q.maxCoeff(), 0.0);
        return outside + inside;
    }

    static double distance_to(const HalfSpace<Dim> &h, const Vec<Dim> &p) { return h.normal.dot(p) - h.offset; }

    static double distance_to(const Freeform<Dim> &f, const Vec<Dim> &p) { return f.signed_distance(p); }

    static double distance_to(const Subtraction<Dim> &s, const Vec<Dim> &p)
    {
        double inner_min = std::numeric_limits<double>::infinity();
        for (const auto &shape : s.inner)
            inner_min = std::min(inner_min, shape.signed_distance(p));
        return std::max(s.outer->signed_distance(p), -inner_min);
    }

    static BoundingBox<Dim> bounds_of(const Ball<Dim> &b)
    {
        return {b.center.array() - b.radius, b.center.array() + b.radius};
    }

    static BoundingBox<Dim> bounds_of(const Box<Dim> &b) { return {b.lower, b.upper}; }

    static BoundingBox<Dim> bounds_of(const HalfSpace<Dim> &h)
    {
        BoundingBox<Dim> box = BoundingBox<Dim>::everything();
        for (int k = 0; k < Dim; ++k)
            if (std::abs(h.normal[k]) == 1.0)
                box.lower[k] = box.upper[k] = h.offset * h.normal[k];
        return box;
    }

    static BoundingBox<Dim> bounds_of(const Freeform<Dim> &f) { return f.bounds(); }

    static BoundingBox<Dim> bounds_of(const Subtraction<Dim> &s)
    {
        BoundingBox<Dim> box = s.outer->surface_bounds();
        for (const auto &shape : s.inner)
            box.expand(shape.surface_bounds());
        return box;
    }

    static std::vector<Vec<Dim>> samples_of(const Ball<Dim> &b)
    {
        std::vector<Vec<Dim>> out;
        if constexpr (Dim == 2)
        {
            for (int k = 0; k < 64; ++k)
            {
                const double t = 2.0 * pi * k / 64.0;
                out.push_back(b.center + b.radius * Vec2(std::cos(t), std::sin(t)));
            }
        }
        else
        {
            // Fibonacci sphere
            const int n = 256;
            const double golden = pi * (3.0 - std::sqrt(5.0));
            for (int k = 0; k < n; ++k)
            {
                const double z = 1.0 - 2.0 * (k + 0.5) / n;
                const double rho = std::sqrt(1.0 - z * z);
                out.push_back(b.center + b.radius * Vec3(rho * std::cos(golden * k), rho * std::sin(golden * k), z));
            }
        }
        return out;
    }

    static std::vector<Vec<Dim>> samples_of(const Box<Dim> &b)
    {
        std::vector<Vec<Dim>> out;
        // corners and face centres
        for (int mask = 0; mask < (1 << Dim); ++mask)
        {
            Vec<Dim> c;
            for (int k = 0; k < Dim; ++k)
                c[k] = (mask >> k) & 1 ? b.upper[k] : b.lower[k];
            out.push_back(c);
        }
        for (int k = 0; k < Dim; ++k)
        {
            Vec<Dim> c = 0.5 * (b.lower + b.upper);
            c[k] = b.lower[k];
            out.push_back(c);
            c[k] = b.upper[k];
            out.push_back(c);
        }
        return out;
    }

    static std::vector<Vec<Dim>> samples_of(const HalfSpace<Dim> &) { return {}; }

    static std::vector<Vec<Dim>> samples_of(const Freeform<Dim> &f)
    {
        std::vector<Vec<Dim>> out(f.vertices().begin(), f.vertices().end());
        if constexpr (Dim == 2)
            for (std::size_t i = 0, n = f.size(); i < n; ++i)
                out.push_back(0.5 * (f.vertices()[i] + f.vertices()[(i + 1) % n]));
        return out;
    }

    static std::vector<Vec<Dim>> samples_of(const Subtraction<Dim> &s) { return s.outer->surface_samples(); }

    std::shared_ptr<const ShapeNode<Dim>> node_;
};

template <int Dim>
double signed_distance(const Shape<Dim> &shape, const Vec<Dim> &p)
{
    return shape.signed_distance(p);
}

} // namespace sphrelax
