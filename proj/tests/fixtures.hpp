#pragma once

#include "sphrelax/sphrelax.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace fixtures
{

using namespace sphrelax;

/// Regular icosahedron with edge length `a` centred at `c`.
inline TriMesh icosahedron(double a = 1.0, const Vec3 &c = Vec3::Zero())
{
    const double t = 0.5 * (1.0 + std::sqrt(5.0));
    const double s = 0.5 * a;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto &p : v)
        p = c + s * p;
    std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return TriMesh(std::move(v), std::move(f));
}

// Gauss-Legendre nodes and weights on [a, b], Newton iteration on P_n.
inline std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b)
{
    std::vector<std::pair<double, double>> out;
    for (int i = 1; i <= n; ++i)
    {
        double x = std::cos(pi * (i - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.emplace_back(0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w);
    }
    return out;
}

inline double icosahedron_volume(double a) { return 5.0 / 12.0 * (3.0 + std::sqrt(5.0)) * a * a * a; }

/**
 * Solid block with a sawtooth top (four teeth, valleys at y = 0.6, tips at
 * y = 0.7) inside [0.2, 0.8] x [0.3, 0.7]. A positive `notch_width` cuts a
 * vertical slit of that width down from the valley at x = 0.5. The whole
 * outline is translated by `offset`.
 */
inline Polygon zigzag(double notch_width = 0.0, double notch_depth = 0.12, const Vec2 &offset = Vec2::Zero())
{
    std::vector<Vec2> v = {{0.2, 0.3}, {0.8, 0.3}, {0.8, 0.6}};
    const double w = 0.15;
    for (int k = 0; k < 4; ++k)
    {
        const double valley = 0.8 - (k + 1) * w;
        v.push_back({valley + 0.5 * w, 0.7});
        if (k == 1 && notch_width > 0.0)
        {
            v.push_back({0.5 + 0.5 * notch_width, 0.6});
            v.push_back({0.5 + 0.5 * notch_width, 0.6 - notch_depth});
            v.push_back({0.5 - 0.5 * notch_width, 0.6 - notch_depth});
            v.push_back({0.5 - 0.5 * notch_width, 0.6});
        }
        else
            v.push_back({valley, 0.6});
    }
    for (auto &p : v)
        p += offset;
    return Polygon(std::move(v));
}

/// Shift that keeps the zigzag off the lattice of cell centres of a mesh
/// anchored at the unit box, as real geometry would be.
inline const Vec2 generic_offset(0.011, 0.007);

/// Every site of a square lattice with spacing dx whose centre lies in the
/// half-open box [lo, hi).
template <int Dim>
inline ParticleSet<Dim> lattice_block(const Vec<Dim> &lo, const Vec<Dim> &hi, double dx, BodyRole role, int id = 0,
                                      double factor = -1.0)
{
    ParticleSet<Dim> set =
        make_particle_set<Dim>(id, role, dx, factor > 0.0 ? factor : default_smoothing_factor(role));
    Index<Dim> n;
    for (int k = 0; k < Dim; ++k)
        n[k] = static_cast<int>(std::llround((hi[k] - lo[k]) / dx));
    Index<Dim> idx{};
    while (true)
    {
        Vec<Dim> x;
        for (int k = 0; k < Dim; ++k)
            x[k] = lo[k] + (idx[k] + 0.5) * dx;
        set.push_back(x);
        int k = 0;
        while (k < Dim && ++idx[k] >= n[k])
            idx[k++] = 0;
        if (k == Dim)
            break;
    }
    return set;
}

inline std::filesystem::path temp_dir(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("sphrelax_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path data_dir() { return SPHRELAX_TEST_DATA_DIR; }

} // namespace fixtures
