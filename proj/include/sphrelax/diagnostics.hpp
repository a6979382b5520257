#pragma once

#include "sphrelax/particles.hpp"
#include "sphrelax/system.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sphrelax
{

/// Flags outer particles lying within one spacing of any inner interface.
template <int Dim>
std::vector<std::uint8_t> interface_layer(const ParticleSet<Dim> &outer,
                                          std::span<const LevelSetField<Dim> *const> inner_fields)
{
    std::vector<std::uint8_t> flags(outer.size(), 0);
    if (inner_fields.empty())
        return flags;
    for (std::size_t i = 0; i < outer.size(); ++i)
    {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto *f : inner_fields)
            if (const auto phi = f->try_interpolate(outer.positions[i]))
                nearest = std::min(nearest, std::abs(*phi));
        flags[i] = nearest <= outer.spacing ? 1 : 0;
    }
    return flags;
}

/// E = 1/2 sum m_i (|F_i| dt)^2 over the flagged particles (all when the
/// filter is empty).
template <int Dim>
double kinetic_energy(const ParticleSet<Dim> &set, double dt, std::span<const std::uint8_t> filter = {})
{
    double e = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (filter.empty() || filter[i])
            e += 0.5 * set.masses[i] * set.accelerations[i].squaredNorm() * dt * dt;
    return e;
}

/// A body taking part in a neighbour sum: its particles and a current cell
/// list whose cell size covers the summation radius.
template <int Dim>
struct Neighborhood
{
    const ParticleSet<Dim> *particles;
    const CellList<Dim> *list;
};

/// sum_j grad W_ij V_j over the target's own particles plus every contact
/// body, using the target's kernel.
template <int Dim>
std::vector<Vec<Dim>> kernel_gradient_summation(const ParticleSet<Dim> &target, const CellList<Dim> &own,
                                                std::span<const Neighborhood<Dim>> contacts = {})
{
    const WendlandC2<Dim> kernel = target.kernel();
    const double cutoff = kernel.cutoff();
    std::vector<Vec<Dim>> kgs(target.size(), Vec<Dim>::Zero());
    for (std::size_t i = 0; i < target.size(); ++i)
    {
        const Vec<Dim> &p = target.positions[i];
        Vec<Dim> sum = Vec<Dim>::Zero();
        own.for_each_within(p, cutoff, [&](std::size_t j, const Vec<Dim> &rvec, double r) {
            if (j != i && r > 0.0)
                sum += kernel.gradient(rvec, r) * target.volumes[j];
        });
        for (const auto &c : contacts)
            c.list->for_each_within(p, cutoff, [&](std::size_t k, const Vec<Dim> &rvec, double r) {
                if (r > 0.0)
                    sum += kernel.gradient(rvec, r) * c.particles->volumes[k];
            });
        kgs[i] = sum;
    }
    return kgs;
}

/// rho_i = sum_j m_j W_ij including the particle itself.
template <int Dim>
std::vector<double> density_summation(const ParticleSet<Dim> &target, const CellList<Dim> &own,
                                      std::span<const Neighborhood<Dim>> contacts = {})
{
    const WendlandC2<Dim> kernel = target.kernel();
    const double cutoff = kernel.cutoff();
    std::vector<double> rho(target.size(), 0.0);
    for (std::size_t i = 0; i < target.size(); ++i)
    {
        const Vec<Dim> &p = target.positions[i];
        double sum = 0.0;
        own.for_each_within(p, cutoff, [&](std::size_t j, const Vec<Dim> &, double r) {
            sum += target.masses[j] * kernel.value(r);
        });
        for (const auto &c : contacts)
            c.list->for_each_within(p, cutoff, [&](std::size_t k, const Vec<Dim> &, double r) {
                sum += c.particles->masses[k] * kernel.value(r);
            });
        rho[i] = sum;
    }
    return rho;
}

namespace detail
{

template <int Dim>
double search_radius(const MultiBodySystem<Dim> &system)
{
    double r = system.outer.particles.kernel().cutoff();
    for (const auto &b : system.inner)
        r = std::max(r, b.particles.kernel().cutoff());
    return r;
}

/// Evaluates `f(target, own_list, contacts)` for one body of the system:
/// inner bodies see only themselves, the outer body sees every inner body.
template <int Dim, class F>
auto with_neighborhood(const MultiBodySystem<Dim> &system, int body_id, F &&f)
{
    const auto &target = system.body(body_id).particles;
    const double radius = search_radius(system);
    const CellList<Dim> own = build_cell_list(target, radius);
    std::vector<CellList<Dim>> lists;
    std::vector<Neighborhood<Dim>> contacts;
    if (body_id == 0)
    {
        lists.reserve(system.inner.size());
        for (const auto &b : system.inner)
            lists.push_back(build_cell_list(b.particles, radius));
        for (std::size_t k = 0; k < system.inner.size(); ++k)
            contacts.push_back({&system.inner[k].particles, &lists[k]});
    }
    return f(target, own, std::span<const Neighborhood<Dim>>(contacts));
}

} // namespace detail

/// Zero-order consistency measure. Inner bodies sum over themselves only;
/// the outer body also sums over its contacting inner bodies. No confinement
/// term is included.
template <int Dim>
std::vector<Vec<Dim>> kernel_gradient_summation(const MultiBodySystem<Dim> &system, int body_id)
{
    return detail::with_neighborhood(system, body_id, [](const auto &t, const auto &own, auto contacts) {
        return kernel_gradient_summation<Dim>(t, own, contacts);
    });
}

template <int Dim>
std::vector<double> density_summation(const MultiBodySystem<Dim> &system, int body_id)
{
    return detail::with_neighborhood(system, body_id, [](const auto &t, const auto &own, auto contacts) {
        return density_summation<Dim>(t, own, contacts);
    });
}

template <int Dim>
struct BodyDiagnostics
{
    std::vector<Vec<Dim>> kgs;
    std::vector<double> kgs_magnitude;
    std::vector<double> density;
    std::vector<std::uint8_t> interface_layer;
};

/// Per-body diagnostic fields, indexed by body id.
template <int Dim>
struct DiagnosticsReport
{
    std::vector<BodyDiagnostics<Dim>> bodies;

    /// Mean |KGS| * dx over the outer body's interface layer (0 if empty).
    double interface_mean_kgs(double spacing) const
    {
        const auto &b = bodies.at(0);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < b.kgs.size(); ++i)
            if (b.interface_layer[i])
            {
                sum += b.kgs_magnitude[i] * spacing;
                ++n;
            }
        return n ? sum / static_cast<double>(n) : 0.0;
    }
};

template <int Dim>
DiagnosticsReport<Dim> diagnose(const MultiBodySystem<Dim> &system)
{
    DiagnosticsReport<Dim> report;
    const auto fields = system.inner_fields();
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
    {
        BodyDiagnostics<Dim> d;
        d.kgs = kernel_gradient_summation(system, id);
        d.kgs_magnitude.reserve(d.kgs.size());
        for (const auto &v : d.kgs)
            d.kgs_magnitude.push_back(v.norm());
        d.density = density_summation(system, id);
        const auto &set = system.body(id).particles;
        d.interface_layer = id == 0 ? interface_layer<Dim>(set, fields) : std::vector<std::uint8_t>(set.size(), 0);
        report.bodies.push_back(std::move(d));
    }
    return report;
}

} // namespace sphrelax
