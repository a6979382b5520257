#pragma once

#include "sphrelax/common.hpp"

#include <algorithm>
#include <vector>

namespace sphrelax
{

namespace detail
{

inline double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

inline double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

inline int orientation(const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
    const double v = cross2(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2 &a, const Vec2 &b, const Vec2 &p)
{
    return p.x() <= std::max(a.x(), b.x()) && p.x() >= std::min(a.x(), b.x()) &&
           p.y() <= std::max(a.y(), b.y()) && p.y() >= std::min(a.y(), b.y());
}

inline bool segments_intersect(const Vec2 &p1, const Vec2 &p2, const Vec2 &q1, const Vec2 &q2)
{
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4)
        return true;
    if (o1 == 0 && on_segment(p1, p2, q1))
        return true;
    if (o2 == 0 && on_segment(p1, p2, q2))
        return true;
    if (o3 == 0 && on_segment(q1, q2, p1))
        return true;
    if (o4 == 0 && on_segment(q1, q2, p2))
        return true;
    return false;
}

} // namespace detail

/// Closed simple polygon; the closing edge from the last vertex back to the
/// first is implicit.
class Polygon
{
  public:
    explicit Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices))
    {
        validate();
        for (const auto &v : vertices_)
            bounds_.expand(v);
    }

    const std::vector<Vec2> &vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    const BoundingBox<2> &bounds() const { return bounds_; }

    /// Shoelace area, positive for counter-clockwise winding.
    double signed_area() const
    {
        double a = 0.0;
        for (std::size_t i = 0, n = vertices_.size(); i < n; ++i)
            a += detail::cross2(vertices_[i], vertices_[(i + 1) % n]);
        return 0.5 * a;
    }

    double perimeter() const
    {
        double l = 0.0;
        for (std::size_t i = 0, n = vertices_.size(); i < n; ++i)
            l += (vertices_[(i + 1) % n] - vertices_[i]).norm();
        return l;
    }

    /// Even-odd ray crossing test.
    bool contains(const Vec2 &p) const
    {
        bool inside = false;
        for (std::size_t i = 0, n = vertices_.size(), j = n - 1; i < n; j = i++)
        {
            const Vec2 &a = vertices_[i];
            const Vec2 &b = vertices_[j];
            if ((a.y() > p.y()) != (b.y() > p.y()))
            {
                const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                if (p.x() < x)
                    inside = !inside;
            }
        }
        return inside;
    }

    double unsigned_distance(const Vec2 &p) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0, n = vertices_.size(); i < n; ++i)
            d = std::min(d, detail::point_segment_distance(p, vertices_[i], vertices_[(i + 1) % n]));
        return d;
    }

    double signed_distance(const Vec2 &p) const
    {
        const double d = unsigned_distance(p);
        return contains(p) ? -d : d;
    }

  private:
    void validate() const
    {
        const std::size_t n = vertices_.size();
        if (n < 3)
            throw GeometryError("polygon needs at least 3 vertices, got " + std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!vertices_[i].allFinite())
                throw GeometryError("polygon vertex " + std::to_string(i) + " is not finite");
            if ((vertices_[i] - vertices_[(i + 1) % n]).norm() == 0.0)
                throw GeometryError("polygon has a repeated vertex at index " + std::to_string(i));
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            const Vec2 &a = vertices_[i];
            const Vec2 &b = vertices_[(i + 1) % n];
            for (std::size_t j = i + 1; j < n; ++j)
            {
                // adjacent edges share a vertex by construction
                if (j == i + 1 || (i == 0 && j == n - 1))
                    continue;
                if (detail::segments_intersect(a, b, vertices_[j], vertices_[(j + 1) % n]))
                    throw GeometryError("polygon is self-intersecting (edges " + std::to_string(i) +
                                        " and " + std::to_string(j) + ")");
            }
        }
        if (std::abs(signed_area()) == 0.0)
            throw GeometryError("polygon has zero area");
    }

    std::vector<Vec2> vertices_;
    BoundingBox<2> bounds_;
};

} // namespace sphrelax
