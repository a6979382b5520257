#pragma once

#include "sphrelax/common.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace sphrelax
{

using Triangle = std::array<int, 3>;

/**
 * Closed, consistently oriented triangle mesh with signed-distance queries.
 *
 * Distances come from the nearest triangle found through an axis-aligned
 * bounding-volume hierarchy. The sign uses the angle-weighted pseudonormal of
 * the nearest feature (face, edge or vertex); when the test is inconclusive a
 * ray-parity count decides.
 */
class TriMesh
{
    enum class Feature : std::uint8_t
    {
        face,
        edge,
        vertex
    };

    struct Closest
    {
        double dist2 = std::numeric_limits<double>::infinity();
        Vec3 point = Vec3::Zero();
        int triangle = -1;
        Feature feature = Feature::face;
        int a = -1, b = -1; // vertex ids of the feature (b only for edges)
    };

    struct Node
    {
        BoundingBox<3> box;
        int left = -1;
        int right = -1;
        int first = 0;
        int count = 0;
    };

  public:
    TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles))
    {
        validate_and_orient();
        compute_pseudonormals();
        build_hierarchy();
        for (const auto &v : vertices_)
            bounds_.expand(v);
    }

    const std::vector<Vec3> &vertices() const { return vertices_; }
    const std::vector<Triangle> &triangles() const { return triangles_; }
    const BoundingBox<3> &bounds() const { return bounds_; }

    /// Enclosed volume by the divergence theorem; positive after orientation.
    double volume() const
    {
        double v = 0.0;
        for (const auto &t : triangles_)
            v += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
        return v / 6.0;
    }

    double signed_distance(const Vec3 &p) const
    {
        const Closest c = closest(p);
        const double d = std::sqrt(c.dist2);
        if (d == 0.0)
            return 0.0;
        const Vec3 pn = pseudonormal(c);
        const double s = (p - c.point).dot(pn);
        if (std::abs(s) > 1e-10 * d * pn.norm())
            return s > 0.0 ? d : -d;
        return ray_parity_inside(p) ? -d : d;
    }

    /// Point classification by ray parity alone.
    bool ray_parity_inside(const Vec3 &p) const
    {
        static const std::array<Vec3, 3> directions = {Vec3(0.5773, 0.5774, 0.5772).normalized(),
                                                        Vec3(-0.3141, 0.8271, -0.4660).normalized(),
                                                        Vec3(0.7071, -0.1234, 0.6963).normalized()};
        int votes = 0;
        for (const auto &dir : directions)
        {
            bool grazing = false;
            const int hits = count_ray_hits(p, dir, grazing);
            if (!grazing)
                return hits % 2 == 1;
            votes += hits % 2 == 1 ? 1 : -1;
        }
        return votes > 0;
    }

  private:
    static std::uint64_t edge_key(int a, int b)
    {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    void validate_and_orient()
    {
        if (triangles_.empty())
            throw GeometryError("triangle mesh has no triangles");
        const int nv = static_cast<int>(vertices_.size());
        for (const auto &v : vertices_)
            if (!v.allFinite())
                throw GeometryError("triangle mesh has a non-finite vertex");
        // directed edge -> occurrence count
        std::unordered_map<std::uint64_t, int> directed;
        for (std::size_t t = 0; t < triangles_.size(); ++t)
        {
            const auto &tri = triangles_[t];
            for (int k = 0; k < 3; ++k)
            {
                if (tri[k] < 0 || tri[k] >= nv)
                    throw GeometryError("triangle " + std::to_string(t) + " has an invalid vertex index");
                if (tri[k] == tri[(k + 1) % 3])
                    throw GeometryError("triangle " + std::to_string(t) + " is degenerate");
                ++directed[edge_key(tri[k], tri[(k + 1) % 3])];
            }
            const Vec3 n = (vertices_[tri[1]] - vertices_[tri[0]]).cross(vertices_[tri[2]] - vertices_[tri[0]]);
            if (n.norm() == 0.0)
                throw GeometryError("triangle " + std::to_string(t) + " has zero area");
        }
        std::unordered_map<std::uint64_t, int> undirected;
        for (const auto &[key, count] : directed)
        {
            const int a = static_cast<int>(key >> 32);
            const int b = static_cast<int>(key & 0xffffffffu);
            undirected[edge_key(std::min(a, b), std::max(a, b))] += count;
        }
        std::vector<std::pair<int, int>> open_edges;
        bool inconsistent = false;
        for (const auto &[key, count] : undirected)
        {
            if (count == 1)
                open_edges.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu));
            else if (count > 2)
                throw GeometryError("triangle mesh has a non-manifold edge");
        }
        for (const auto &[key, count] : directed)
            if (count > 1)
                inconsistent = true;
        if (!open_edges.empty())
        {
            std::sort(open_edges.begin(), open_edges.end());
            std::string msg = "triangle mesh is not watertight: " + std::to_string(open_edges.size()) +
                              " boundary edge(s)";
            for (std::size_t i = 0; i < std::min<std::size_t>(10, open_edges.size()); ++i)
                msg += (i == 0 ? ": " : ", ") + std::string("(") + std::to_string(open_edges[i].first) + "," +
                       std::to_string(open_edges[i].second) + ")";
            throw GeometryError(msg);
        }
        if (inconsistent)
            throw GeometryError("triangle mesh is not consistently oriented");
        if (volume() < 0.0)
            for (auto &t : triangles_)
                std::swap(t[1], t[2]);
    }

    void compute_pseudonormals()
    {
        face_normals_.resize(triangles_.size());
        vertex_normals_.assign(vertices_.size(), Vec3::Zero());
        for (std::size_t t = 0; t < triangles_.size(); ++t)
        {
            const auto &tri = triangles_[t];
            const Vec3 n = (vertices_[tri[1]] - vertices_[tri[0]])
                               .cross(vertices_[tri[2]] - vertices_[tri[0]])
                               .normalized();
            face_normals_[t] = n;
            for (int k = 0; k < 3; ++k)
            {
                const Vec3 e1 = (vertices_[tri[(k + 1) % 3]] - vertices_[tri[k]]).normalized();
                const Vec3 e2 = (vertices_[tri[(k + 2) % 3]] - vertices_[tri[k]]).normalized();
                const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
                vertex_normals_[tri[k]] += angle * n;
            }
            for (int k = 0; k < 3; ++k)
            {
                const int a = tri[k], b = tri[(k + 1) % 3];
                edge_normals_.try_emplace(edge_key(std::min(a, b), std::max(a, b)), Vec3::Zero()).first->second += n;
            }
        }
    }

    Vec3 pseudonormal(const Closest &c) const
    {
        switch (c.feature)
        {
        case Feature::vertex:
            return vertex_normals_[c.a];
        case Feature::edge:
            return edge_normals_.at(edge_key(std::min(c.a, c.b), std::max(c.a, c.b)));
        default:
            return face_normals_[c.triangle];
        }
    }

    BoundingBox<3> triangle_box(int t) const
    {
        BoundingBox<3> b;
        for (int k : triangles_[t])
            b.expand(vertices_[k]);
        return b;
    }

    void build_hierarchy()
    {
        order_.resize(triangles_.size());
        std::iota(order_.begin(), order_.end(), 0);
        std::vector<Vec3> centroids(triangles_.size());
        for (std::size_t t = 0; t < triangles_.size(); ++t)
            centroids[t] = (vertices_[triangles_[t][0]] + vertices_[triangles_[t][1]] + vertices_[triangles_[t][2]]) / 3.0;
        nodes_.clear();
        nodes_.reserve(2 * triangles_.size());
        build_node(0, static_cast<int>(order_.size()), centroids);
    }

    int build_node(int first, int last, const std::vector<Vec3> &centroids)
    {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        BoundingBox<3> box, cbox;
        for (int i = first; i < last; ++i)
        {
            box.expand(triangle_box(order_[i]));
            cbox.expand(centroids[order_[i]]);
        }
        nodes_[id].box = box;
        if (last - first <= 4)
        {
            nodes_[id].first = first;
            nodes_[id].count = last - first;
            return id;
        }
        int axis = 0;
        cbox.extent().maxCoeff(&axis);
        const int mid = (first + last) / 2;
        std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + last,
                         [&](int a, int b) { return centroids[a][axis] < centroids[b][axis]; });
        const int left = build_node(first, mid, centroids);
        const int right = build_node(mid, last, centroids);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    static double box_distance2(const BoundingBox<3> &b, const Vec3 &p)
    {
        const Vec3 d = (b.lower - p).cwiseMax(p - b.upper).cwiseMax(Vec3::Zero());
        return d.squaredNorm();
    }

    void closest_on_triangle(const Vec3 &p, int t, Closest &best) const
    {
        const auto &tri = triangles_[t];
        const Vec3 &a = vertices_[tri[0]];
        const Vec3 &b = vertices_[tri[1]];
        const Vec3 &c = vertices_[tri[2]];
        Closest r;
        r.triangle = t;
        const Vec3 ab = b - a, ac = c - a, ap = p - a;
        const double d1 = ab.dot(ap), d2 = ac.dot(ap);
        const Vec3 bp = p - b;
        const double d3 = ab.dot(bp), d4 = ac.dot(bp);
        const Vec3 cp = p - c;
        const double d5 = ab.dot(cp), d6 = ac.dot(cp);
        const double vc = d1 * d4 - d3 * d2;
        const double vb = d5 * d2 - d1 * d6;
        const double va = d3 * d6 - d5 * d4;
        if (d1 <= 0.0 && d2 <= 0.0)
        {
            r.point = a;
            r.feature = Feature::vertex;
            r.a = tri[0];
        }
        else if (d3 >= 0.0 && d4 <= d3)
        {
            r.point = b;
            r.feature = Feature::vertex;
            r.a = tri[1];
        }
        else if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
        {
            r.point = a + (d1 / (d1 - d3)) * ab;
            r.feature = Feature::edge;
            r.a = tri[0];
            r.b = tri[1];
        }
        else if (d6 >= 0.0 && d5 <= d6)
        {
            r.point = c;
            r.feature = Feature::vertex;
            r.a = tri[2];
        }
        else if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
        {
            r.point = a + (d2 / (d2 - d6)) * ac;
            r.feature = Feature::edge;
            r.a = tri[0];
            r.b = tri[2];
        }
        else if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        {
            r.point = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
            r.feature = Feature::edge;
            r.a = tri[1];
            r.b = tri[2];
        }
        else
        {
            const double denom = 1.0 / (va + vb + vc);
            r.point = a + ab * (vb * denom) + ac * (vc * denom);
            r.feature = Feature::face;
        }
        r.dist2 = (p - r.point).squaredNorm();
        if (r.dist2 < best.dist2)
            best = r;
    }

    Closest closest(const Vec3 &p) const
    {
        Closest best;
        std::vector<int> stack{0};
        while (!stack.empty())
        {
            const Node &node = nodes_[stack.back()];
            stack.pop_back();
            if (box_distance2(node.box, p) >= best.dist2)
                continue;
            if (node.left < 0)
            {
                for (int i = node.first; i < node.first + node.count; ++i)
                    closest_on_triangle(p, order_[i], best);
                continue;
            }
            const double dl = box_distance2(nodes_[node.left].box, p);
            const double dr = box_distance2(nodes_[node.right].box, p);
            // visit the nearer child first
            if (dl < dr)
            {
                stack.push_back(node.right);
                stack.push_back(node.left);
            }
            else
            {
                stack.push_back(node.left);
                stack.push_back(node.right);
            }
        }
        return best;
    }

    int count_ray_hits(const Vec3 &origin, const Vec3 &dir, bool &grazing) const
    {
        constexpr double tol = 1e-9;
        int hits = 0;
        for (const auto &tri : triangles_)
        {
            const Vec3 &v0 = vertices_[tri[0]];
            const Vec3 e1 = vertices_[tri[1]] - v0;
            const Vec3 e2 = vertices_[tri[2]] - v0;
            const Vec3 pv = dir.cross(e2);
            const double det = e1.dot(pv);
            if (std::abs(det) < 1e-14)
                continue;
            const double inv = 1.0 / det;
            const Vec3 tv = origin - v0;
            const double u = tv.dot(pv) * inv;
            if (u < -tol || u > 1.0 + tol)
                continue;
            const Vec3 qv = tv.cross(e1);
            const double v = dir.dot(qv) * inv;
            if (v < -tol || u + v > 1.0 + tol)
                continue;
            const double t = e2.dot(qv) * inv;
            if (t <= 0.0)
                continue;
            if (u < tol || v < tol || u + v > 1.0 - tol)
                grazing = true;
            ++hits;
        }
        return hits;
    }

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Vec3> face_normals_;
    std::vector<Vec3> vertex_normals_;
    std::unordered_map<std::uint64_t, Vec3> edge_normals_;
    std::vector<Node> nodes_;
    std::vector<int> order_;
    BoundingBox<3> bounds_;
};

} // namespace sphrelax
