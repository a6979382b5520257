#pragma once

#include "sphrelax/common.hpp"
#include "sphrelax/kernel.hpp"
#include "sphrelax/shape.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sphrelax
{

/// Smoothed Heaviside volume fraction of a cell whose centre has level-set
/// value phi:  1/2 + phi/(2 eps) + sin(pi phi / eps) / (2 pi) on |phi| < eps.
inline double heaviside(double phi, double eps)
{
    if (phi < -eps)
        return 0.0;
    if (phi > eps)
        return 1.0;
    return std::clamp(0.5 + phi / (2.0 * eps) + std::sin(pi * phi / eps) / (2.0 * pi), 0.0, 1.0);
}

/**
 * Signed distance sampled at the cell centres of a uniform Cartesian mesh,
 * optionally carrying a narrow band of precomputed kernel-gradient integrals
 * over the exterior cells (static confinement).
 *
 * Cell (i, j[, k]) has centre origin + (index + 1/2) * spacing. Storage is
 * x-fastest.
 */
template <int Dim>
class LevelSetField
{
  public:
    LevelSetField() = default;

    LevelSetField(const Vec<Dim> &origin, double spacing, const Index<Dim> &dims, std::vector<double> phi)
        : origin_(origin), spacing_(spacing), dims_(dims), phi_(std::move(phi))
    {
        std::size_t n = 1;
        for (int k = 0; k < Dim; ++k)
        {
            if (dims_[k] < 2)
                throw GeometryError("level-set field needs at least 2 cells per axis");
            n *= static_cast<std::size_t>(dims_[k]);
        }
        if (phi_.size() != n)
            throw GeometryError("level-set field data does not match its dimensions");
    }

    const Vec<Dim> &origin() const { return origin_; }
    double spacing() const { return spacing_; }
    const Index<Dim> &dims() const { return dims_; }
    std::size_t cell_count() const { return phi_.size(); }
    std::span<const double> phi() const { return phi_; }
    double phi(std::size_t cell) const { return phi_[cell]; }

    BoundingBox<Dim> bounds() const
    {
        Vec<Dim> upper = origin_;
        for (int k = 0; k < Dim; ++k)
            upper[k] += dims_[k] * spacing_;
        return {origin_, upper};
    }

    std::size_t linear(const Index<Dim> &idx) const
    {
        std::size_t lin = 0;
        for (int k = Dim - 1; k >= 0; --k)
            lin = lin * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(idx[k]);
        return lin;
    }

    Index<Dim> unravel(std::size_t lin) const
    {
        Index<Dim> idx;
        for (int k = 0; k < Dim; ++k)
        {
            idx[k] = static_cast<int>(lin % static_cast<std::size_t>(dims_[k]));
            lin /= static_cast<std::size_t>(dims_[k]);
        }
        return idx;
    }

    bool valid(const Index<Dim> &idx) const
    {
        for (int k = 0; k < Dim; ++k)
            if (idx[k] < 0 || idx[k] >= dims_[k])
                return false;
        return true;
    }

    Vec<Dim> cell_center(const Index<Dim> &idx) const
    {
        Vec<Dim> c;
        for (int k = 0; k < Dim; ++k)
            c[k] = origin_[k] + (idx[k] + 0.5) * spacing_;
        return c;
    }

    Vec<Dim> cell_center(std::size_t lin) const { return cell_center(unravel(lin)); }

    bool same_grid(const LevelSetField &other) const
    {
        return dims_ == other.dims_ && spacing_ == other.spacing_ && origin_ == other.origin_;
    }

    std::optional<double> try_interpolate(const Vec<Dim> &p) const
    {
        Stencil s;
        if (!locate(p, s))
            return std::nullopt;
        double value = 0.0;
        for (int corner = 0; corner < (1 << Dim); ++corner)
            value += s.weight(corner) * phi_[s.cell(corner, *this)];
        return value;
    }

    double interpolate(const Vec<Dim> &p) const
    {
        if (auto v = try_interpolate(p))
            return *v;
        throw GeometryError("query outside level-set domain");
    }

    /// Central-difference gradient of the interpolated field, step spacing/2.
    std::optional<Vec<Dim>> try_gradient(const Vec<Dim> &p) const
    {
        const double step = 0.5 * spacing_;
        Vec<Dim> g;
        for (int k = 0; k < Dim; ++k)
        {
            Vec<Dim> a = p, b = p;
            a[k] += step;
            b[k] -= step;
            const auto fa = try_interpolate(a);
            const auto fb = try_interpolate(b);
            if (!fa || !fb)
                return std::nullopt;
            g[k] = (*fa - *fb) / (2.0 * step);
        }
        return g;
    }

    /// Unit normal, or nullopt near skeleton points where the gradient
    /// vanishes and at the edge of the mesh.
    std::optional<Vec<Dim>> try_normal(const Vec<Dim> &p) const
    {
        const auto g = try_gradient(p);
        if (!g)
            return std::nullopt;
        const double n = g->norm();
        if (!(n > 1e-8))
            return std::nullopt;
        return Vec<Dim>(*g / n);
    }

    Vec<Dim> normal(const Vec<Dim> &p) const
    {
        if (!try_gradient(p))
            throw GeometryError("query outside level-set domain");
        if (auto n = try_normal(p))
            return *n;
        throw GeometryError("undefined normal");
    }

    bool has_band() const { return !band_slot_.empty(); }
    double band_cutoff() const { return band_cutoff_; }
    std::size_t band_size() const { return band_values_.size(); }
    bool in_band(std::size_t cell) const { return has_band() && band_slot_[cell] >= 0; }

    Vec<Dim> band_value(std::size_t cell) const
    {
        return in_band(cell) ? band_values_[static_cast<std::size_t>(band_slot_[cell])] : Vec<Dim>::Zero();
    }

    /// Multilinear interpolation of the confinement integrals; cells outside
    /// the band contribute zero.
    Vec<Dim> confinement_gradient(const Vec<Dim> &p) const
    {
        if (!has_band())
            throw GeometryError("confinement band has not been precomputed");
        Stencil s;
        if (!locate(p, s))
            throw GeometryError("query outside level-set domain");
        Vec<Dim> value = Vec<Dim>::Zero();
        for (int corner = 0; corner < (1 << Dim); ++corner)
        {
            const int slot = band_slot_[s.cell(corner, *this)];
            if (slot >= 0)
                value += s.weight(corner) * band_values_[static_cast<std::size_t>(slot)];
        }
        return value;
    }

    void set_band(double cutoff, std::vector<std::int32_t> slots, std::vector<Vec<Dim>> values)
    {
        band_cutoff_ = cutoff;
        band_slot_ = std::move(slots);
        band_values_ = std::move(values);
    }

  private:
    struct Stencil
    {
        Index<Dim> base;
        Vec<Dim> frac;

        double weight(int corner) const
        {
            double w = 1.0;
            for (int k = 0; k < Dim; ++k)
                w *= (corner >> k) & 1 ? frac[k] : 1.0 - frac[k];
            return w;
        }

        std::size_t cell(int corner, const LevelSetField &f) const
        {
            Index<Dim> idx = base;
            for (int k = 0; k < Dim; ++k)
                idx[k] += (corner >> k) & 1;
            return f.linear(idx);
        }
    };

    bool locate(const Vec<Dim> &p, Stencil &s) const
    {
        for (int k = 0; k < Dim; ++k)
        {
            const double u = (p[k] - origin_[k]) / spacing_ - 0.5;
            if (!(u >= 0.0 && u <= dims_[k] - 1))
                return false;
            const int i0 = std::min(static_cast<int>(std::floor(u)), dims_[k] - 2);
            s.base[k] = i0;
            s.frac[k] = u - i0;
        }
        return true;
    }

    Vec<Dim> origin_ = Vec<Dim>::Zero();
    double spacing_ = 0.0;
    Index<Dim> dims_{};
    std::vector<double> phi_;

    double band_cutoff_ = 0.0;
    std::vector<std::int32_t> band_slot_;
    std::vector<Vec<Dim>> band_values_;
};

/// Samples the signed distance of `shape` at every cell centre of a mesh of
/// spacing `cell_size` covering `bounds` (origin at bounds.lower).
template <int Dim>
LevelSetField<Dim> build_level_set(const Shape<Dim> &shape, const BoundingBox<Dim> &bounds, double cell_size)
{
    if (!(cell_size > 0.0))
        throw GeometryError("level-set cell size must be positive");
    const BoundingBox<Dim> surface = shape.surface_bounds();
    const double margin = 4.0 * cell_size * (1.0 - 1e-9);
    for (int k = 0; k < Dim; ++k)
    {
        if (std::isfinite(surface.lower[k]) && surface.lower[k] - bounds.lower[k] < margin)
            throw GeometryError("insufficient level-set padding");
        if (std::isfinite(surface.upper[k]) && bounds.upper[k] - surface.upper[k] < margin)
            throw GeometryError("insufficient level-set padding");
    }
    Index<Dim> dims;
    std::size_t n = 1;
    for (int k = 0; k < Dim; ++k)
    {
        dims[k] = static_cast<int>(std::ceil((bounds.upper[k] - bounds.lower[k]) / cell_size - 1e-9));
        n *= static_cast<std::size_t>(dims[k]);
    }
    LevelSetField<Dim> layout(bounds.lower, cell_size, dims, std::vector<double>(n, 0.0));
    std::vector<double> phi(n);
    for (std::size_t c = 0; c < n; ++c)
        phi[c] = shape.signed_distance(layout.cell_center(c));
    return LevelSetField<Dim>(bounds.lower, cell_size, dims, std::move(phi));
}

/// Boolean subtraction on a shared mesh: max(phi_outer, -min_k phi_inner_k)
/// cell by cell. The result carries no confinement band.
template <int Dim>
LevelSetField<Dim> subtract_fields(const LevelSetField<Dim> &outer, std::span<const LevelSetField<Dim> *const> inner)
{
    std::vector<double> phi(outer.phi().begin(), outer.phi().end());
    for (const auto *f : inner)
    {
        if (!f->same_grid(outer))
            throw GeometryError("Boolean subtraction requires fields on the same mesh");
        for (std::size_t c = 0; c < phi.size(); ++c)
            phi[c] = std::max(phi[c], -f->phi(c));
    }
    return LevelSetField<Dim>(outer.origin(), outer.spacing(), outer.dims(), std::move(phi));
}

/**
 * Fills the confinement band of `field`: for every cell centre c with
 * |phi(c)| < cutoff + spacing,
 *
 *   I(c) = sum_{k : |c - x_k| < cutoff} H(phi_k, eps) spacing^Dim grad W(c - x_k).
 *
 * H vanishes below -eps, so only exterior cells and the inner half of the
 * smoothed transition contribute.
 * Cell-centre separations are integer multiples of the spacing, so the kernel
 * gradients form one fixed stencil.
 */
template <int Dim>
LevelSetField<Dim> precompute_confinement(LevelSetField<Dim> field, const WendlandC2<Dim> &kernel, double eps)
{
    const double l = field.spacing();
    const double cutoff = kernel.cutoff();
    if (!(eps > 0.0))
        throw GeometryError("Heaviside width must be positive");
    if (cutoff < 2.0 * l)
        throw GeometryError("kernel cutoff must be at least two level-set cells");

    struct Tap
    {
        Index<Dim> offset;
        Vec<Dim> weight;
    };
    std::vector<Tap> stencil;
    const int reach = static_cast<int>(std::ceil(cutoff / l));
    const double cell_volume = std::pow(l, Dim);
    Index<Dim> o;
    o.fill(-reach);
    while (true)
    {
        Vec<Dim> sep;
        bool zero = true;
        for (int k = 0; k < Dim; ++k)
        {
            sep[k] = -o[k] * l;
            zero = zero && o[k] == 0;
        }
        if (!zero && sep.norm() < cutoff)
            stencil.push_back({o, cell_volume * kernel.gradient(sep)});
        int k = 0;
        while (k < Dim && ++o[k] > reach)
            o[k++] = -reach;
        if (k == Dim)
            break;
    }

    const std::size_t n = field.cell_count();
    std::vector<double> volume_fraction(n);
    for (std::size_t c = 0; c < n; ++c)
    {
        const double phi = field.phi(c);
        volume_fraction[c] = heaviside(phi, eps);
    }

    std::vector<std::ptrdiff_t> shifts;
    for (const Tap &tap : stencil)
    {
        std::ptrdiff_t shift = 0, stride = 1;
        for (int k = 0; k < Dim; ++k)
        {
            shift += tap.offset[k] * stride;
            stride *= field.dims()[k];
        }
        shifts.push_back(shift);
    }

    const double width = cutoff + l;
    std::vector<std::int32_t> slots(n, -1);
    std::vector<Vec<Dim>> values;
    for (std::size_t c = 0; c < n; ++c)
    {
        if (!(std::abs(field.phi(c)) < width))
            continue;
        const Index<Dim> idx = field.unravel(c);
        for (int k = 0; k < Dim; ++k)
            if (idx[k] - reach < 0 || idx[k] + reach >= field.dims()[k])
                throw GeometryError("level-set domain too small for confinement band");
        Vec<Dim> sum = Vec<Dim>::Zero();
        for (std::size_t t = 0; t < stencil.size(); ++t)
        {
            const double v = volume_fraction[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + shifts[t])];
            if (v > 0.0)
                sum += v * stencil[t].weight;
        }
        slots[c] = static_cast<std::int32_t>(values.size());
        values.push_back(sum);
    }
    field.set_band(cutoff, std::move(slots), std::move(values));
    return field;
}

/// Number of interface cells of `outer` where an inner field claims the same
/// phase (both inside or both outside). Only cells with |phi| <= width in
/// both fields are examined.
template <int Dim>
std::size_t count_sign_conflicts(const LevelSetField<Dim> &outer, std::span<const LevelSetField<Dim> *const> inner,
                                 double width)
{
    std::size_t conflicts = 0;
    for (std::size_t c = 0; c < outer.cell_count(); ++c)
    {
        const double po = outer.phi(c);
        if (std::abs(po) > width)
            continue;
        const Vec<Dim> x = outer.cell_center(c);
        for (const auto *f : inner)
        {
            const auto pi_ = f->try_interpolate(x);
            if (!pi_ || std::abs(*pi_) > width)
                continue;
            if ((po > 0.0 && *pi_ > 0.0) || (po < 0.0 && *pi_ < 0.0))
            {
                ++conflicts;
                break;
            }
        }
    }
    return conflicts;
}

} // namespace sphrelax
