#pragma once

#include "sphrelax/common.hpp"
#include "sphrelax/kernel.hpp"
#include "sphrelax/level_set.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sphrelax
{

enum class BodyRole
{
    inner_solid,
    outer_fluid
};

inline double default_smoothing_factor(BodyRole role) { return role == BodyRole::inner_solid ? 1.05 : 1.3; }

/// Particle state of one body. All particles share the spacing, hence the
/// volume dx^Dim and mass rho0 * dx^Dim.
template <int Dim>
struct ParticleSet
{
    int body_id = 0;
    BodyRole role = BodyRole::outer_fluid;
    double spacing = 0.0;
    double smoothing_length = 0.0;
    double rest_density = 1.0;

    std::vector<Vec<Dim>> positions;
    std::vector<Vec<Dim>> accelerations;
    std::vector<double> volumes;
    std::vector<double> masses;

    std::size_t size() const { return positions.size(); }
    WendlandC2<Dim> kernel() const { return WendlandC2<Dim>(smoothing_length); }

    void push_back(const Vec<Dim> &p)
    {
        const double v = std::pow(spacing, Dim);
        positions.push_back(p);
        accelerations.push_back(Vec<Dim>::Zero());
        volumes.push_back(v);
        masses.push_back(rest_density * v);
    }
};

template <int Dim>
ParticleSet<Dim> make_particle_set(int body_id, BodyRole role, double spacing, double smoothing_factor,
                                   double rest_density = 1.0)
{
    if (!(spacing > 0.0))
        throw Error("particle spacing must be positive");
    if (!(smoothing_factor > 0.0))
        throw Error("smoothing length factor must be positive");
    ParticleSet<Dim> set;
    set.body_id = body_id;
    set.role = role;
    set.spacing = spacing;
    set.smoothing_length = smoothing_factor * spacing;
    set.rest_density = rest_density;
    return set;
}

/// Cubic-lattice seeding: sites origin + (i + 1/2) dx of the field's mesh
/// whose interpolated level set is strictly negative.
template <int Dim>
ParticleSet<Dim> lattice_seed(const LevelSetField<Dim> &field, double spacing, BodyRole role, int body_id = 0,
                              double smoothing_factor = -1.0, double rest_density = 1.0)
{
    ParticleSet<Dim> set = make_particle_set<Dim>(
        body_id, role, spacing, smoothing_factor > 0.0 ? smoothing_factor : default_smoothing_factor(role),
        rest_density);
    const BoundingBox<Dim> box = field.bounds();
    Index<Dim> n;
    for (int k = 0; k < Dim; ++k)
        n[k] = static_cast<int>(std::floor(box.extent()[k] / spacing + 1e-9));
    Index<Dim> idx{};
    while (true)
    {
        Vec<Dim> x;
        for (int k = 0; k < Dim; ++k)
            x[k] = box.lower[k] + (idx[k] + 0.5) * spacing;
        if (const auto phi = field.try_interpolate(x); phi && *phi < 0.0)
            set.push_back(x);
        int k = 0;
        while (k < Dim && ++idx[k] >= n[k])
            idx[k++] = 0;
        if (k == Dim)
            break;
    }
    if (set.size() == 0)
        throw Error("region unresolved at this spacing");
    return set;
}

/// Bounding box of interior level-set cells farther than one spacing from
/// every particle, i.e. parts of the body the lattice failed to resolve.
template <int Dim>
std::optional<BoundingBox<Dim>> unresolved_region(const LevelSetField<Dim> &field, const ParticleSet<Dim> &set);

/**
 * Uniform bucket grid over the particles' bounding box with cells of edge
 * `cell_size`. Particles are stored bucket-sorted with a copy of their
 * positions, so a query touches contiguous memory.
 */
template <int Dim>
class CellList
{
  public:
    CellList() = default;

    CellList(std::span<const Vec<Dim>> positions, double cell_size) : cell_size_(cell_size)
    {
        if (!(cell_size > 0.0))
            throw Error("cell size must be positive");
        BoundingBox<Dim> box;
        for (const auto &p : positions)
            box.expand(p);
        if (positions.empty())
            box = {Vec<Dim>::Zero(), Vec<Dim>::Zero()};
        origin_ = box.lower;
        std::size_t cells = 1;
        for (int k = 0; k < Dim; ++k)
        {
            dims_[k] = static_cast<int>(std::floor((box.upper[k] - box.lower[k]) / cell_size)) + 1;
            cells *= static_cast<std::size_t>(dims_[k]);
        }
        start_.assign(cells + 1, 0);
        std::vector<std::size_t> cell_of(positions.size());
        for (std::size_t i = 0; i < positions.size(); ++i)
        {
            cell_of[i] = linear(cell_index(positions[i]));
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < cells; ++c)
            start_[c + 1] += start_[c];
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        index_.resize(positions.size());
        sorted_.resize(positions.size());
        for (std::size_t i = 0; i < positions.size(); ++i)
        {
            const std::size_t slot = fill[cell_of[i]]++;
            index_[slot] = i;
            sorted_[slot] = positions[i];
        }
    }

    double cell_size() const { return cell_size_; }
    std::size_t size() const { return index_.size(); }
    std::size_t bucket_count() const { return start_.empty() ? 0 : start_.size() - 1; }
    const Index<Dim> &dims() const { return dims_; }

    /// Particle indices of one bucket.
    std::span<const std::size_t> bucket(std::size_t cell) const
    {
        return {index_.data() + start_[cell], start_[cell + 1] - start_[cell]};
    }

    Index<Dim> cell_index(const Vec<Dim> &p) const
    {
        Index<Dim> idx;
        for (int k = 0; k < Dim; ++k)
            idx[k] = std::clamp(static_cast<int>(std::floor((p[k] - origin_[k]) / cell_size_)), 0, dims_[k] - 1);
        return idx;
    }

    std::size_t linear(const Index<Dim> &idx) const
    {
        std::size_t lin = 0;
        for (int k = Dim - 1; k >= 0; --k)
            lin = lin * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(idx[k]);
        return lin;
    }

    /**
     * Calls f(j, rvec, r) for every stored particle j with r < radius, where
     * rvec = p - x_j and r = |rvec| (zero for coincident points). Requires
     * radius <= cell_size().
     */
    template <class F>
    void for_each_within(const Vec<Dim> &p, double radius, F &&f) const
    {
        if (index_.empty())
            return;
        Index<Dim> lo, hi;
        for (int k = 0; k < Dim; ++k)
        {
            const double u = (p[k] - origin_[k]) / cell_size_;
            lo[k] = std::max(static_cast<int>(std::floor(u)) - 1, 0);
            hi[k] = std::min(static_cast<int>(std::floor(u)) + 1, dims_[k] - 1);
            if (lo[k] > hi[k])
                return;
        }
        const double r2max = radius * radius;
        Index<Dim> idx = lo;
        while (true)
        {
            // innermost axis is contiguous in the bucket arrays
            Index<Dim> first = idx, last = idx;
            first[0] = lo[0];
            last[0] = hi[0];
            const std::size_t b = start_[linear(first)];
            const std::size_t e = start_[linear(last) + 1];
            for (std::size_t s = b; s < e; ++s)
            {
                const Vec<Dim> rvec = p - sorted_[s];
                const double r2 = rvec.squaredNorm();
                if (r2 < r2max)
                    f(index_[s], rvec, std::sqrt(r2));
            }
            int k = 1;
            while (k < Dim && ++idx[k] > hi[k])
            {
                idx[k] = lo[k];
                ++k;
            }
            if (k >= Dim)
                break;
        }
    }

  private:
    double cell_size_ = 1.0;
    Vec<Dim> origin_ = Vec<Dim>::Zero();
    Index<Dim> dims_{};
    std::vector<std::size_t> start_;
    std::vector<std::size_t> index_;
    std::vector<Vec<Dim>> sorted_;
};

template <int Dim>
CellList<Dim> build_cell_list(const ParticleSet<Dim> &set, double cutoff)
{
    return CellList<Dim>(set.positions, cutoff);
}

/// Same-body neighbours of particle i closer than the list's cell size.
template <int Dim>
std::vector<std::size_t> neighbors_within(const CellList<Dim> &list, const ParticleSet<Dim> &set, std::size_t i)
{
    std::vector<std::size_t> out;
    const Vec<Dim> &p = set.positions[i];
    list.for_each_within(p, list.cell_size(), [&](std::size_t j, const Vec<Dim> &, double) {
        if (j != i)
            out.push_back(j);
    });
    return out;
}

/// Particles of another body within `cutoff` of an arbitrary point.
template <int Dim>
std::vector<std::size_t> cross_neighbors(const CellList<Dim> &list, const ParticleSet<Dim> &, const Vec<Dim> &p,
                                         double cutoff)
{
    if (cutoff > list.cell_size() * (1.0 + 1e-12))
        throw Error("cross-body cutoff exceeds the cell size of the target list");
    std::vector<std::size_t> out;
    list.for_each_within(p, cutoff, [&](std::size_t j, const Vec<Dim> &, double) { out.push_back(j); });
    return out;
}

template <int Dim>
std::optional<BoundingBox<Dim>> unresolved_region(const LevelSetField<Dim> &field, const ParticleSet<Dim> &set)
{
    const CellList<Dim> list = build_cell_list(set, set.spacing);
    BoundingBox<Dim> box;
    for (std::size_t c = 0; c < field.cell_count(); ++c)
    {
        if (!(field.phi(c) < -0.5 * field.spacing()))
            continue;
        const Vec<Dim> x = field.cell_center(c);
        bool covered = false;
        list.for_each_within(x, set.spacing, [&](std::size_t, const Vec<Dim> &, double) { covered = true; });
        if (!covered)
            box.expand(x);
    }
    if (box.empty())
        return std::nullopt;
    return box;
}

} // namespace sphrelax
