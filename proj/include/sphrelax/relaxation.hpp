#pragma once

#include "sphrelax/diagnostics.hpp"
#include "sphrelax/level_set.hpp"
#include "sphrelax/particles.hpp"
#include "sphrelax/system.hpp"

#include <functional>
#include <type_traits>
#include <iostream>
#include <vector>

namespace sphrelax
{

struct RelaxationConfig
{
    double cfl = 0.25;
    int max_steps = 10000;
    /// Convergence threshold on the normalized kinetic energy metric.
    double threshold = 1e-4;
    /// Slack allowed above the bounded surface, in particle spacings.
    double bounding_tolerance = 0.1;

    void validate() const
    {
        if (!(cfl > 0.0 && cfl <= 0.25))
            throw Error("CFL factor must lie in (0, 0.25]");
        if (max_steps < 1)
            throw Error("max steps must be at least 1");
        if (!(threshold > 0.0))
            throw Error("convergence threshold must be positive");
    }
};

/// Background-pressure acceleration with static confinement:
///   F_i = -(2 p0 V_i / m_i) [ sum_j grad W_ij V_j + I(r_i) ].
template <int Dim>
void pressure_force_confined(ParticleSet<Dim> &set, const CellList<Dim> &list, const LevelSetField<Dim> &field,
                             double p0 = 1.0)
{
    const WendlandC2<Dim> kernel = set.kernel();
    const double cutoff = kernel.cutoff();
    for (std::size_t i = 0; i < set.size(); ++i)
    {
        const Vec<Dim> &p = set.positions[i];
        Vec<Dim> sum = Vec<Dim>::Zero();
        list.for_each_within(p, cutoff, [&](std::size_t j, const Vec<Dim> &rvec, double r) {
            if (j != i && r > 0.0)
                sum += kernel.gradient(rvec, r) * set.volumes[j];
        });
        sum += field.confinement_gradient(p);
        set.accelerations[i] = (-2.0 * set.volumes[i] / set.masses[i]) * (p0 * sum);
    }
}

/// A contacting inner body as seen by the outer body.
template <int Dim>
struct ContactBody
{
    const ParticleSet<Dim> *particles;
    const CellList<Dim> *list;
    double p0 = 1.0;
};

/**
 * Outer-body acceleration in complex relaxation:
 *
 *   F_i = -(2 V_i / m_i) [ p0 (sum_{j outer} grad W_ij V_j + I_ext(r_i))
 *                          + sum_{k inner} p0_k grad W_ik V_k ],
 *
 * all with the outer kernel. `boundary` supplies the confinement integrals of
 * the external boundary only.
 */
template <int Dim>
void pressure_force_complex(ParticleSet<Dim> &outer, const CellList<Dim> &list,
                            std::span<const ContactBody<Dim>> contacts, const LevelSetField<Dim> &boundary,
                            double p0 = 1.0)
{
    const WendlandC2<Dim> kernel = outer.kernel();
    const double cutoff = kernel.cutoff();
    for (const auto &c : contacts)
        if (c.list->cell_size() < cutoff * (1.0 - 1e-12))
            throw Error("contact cell list is finer than the outer kernel cutoff");
    for (std::size_t i = 0; i < outer.size(); ++i)
    {
        const Vec<Dim> &p = outer.positions[i];
        Vec<Dim> own = Vec<Dim>::Zero();
        list.for_each_within(p, cutoff, [&](std::size_t j, const Vec<Dim> &rvec, double r) {
            if (j != i && r > 0.0)
                own += kernel.gradient(rvec, r) * outer.volumes[j];
        });
        own += boundary.confinement_gradient(p);
        Vec<Dim> total = p0 * own;
        for (const auto &c : contacts)
        {
            Vec<Dim> cross = Vec<Dim>::Zero();
            c.list->for_each_within(p, cutoff, [&](std::size_t k, const Vec<Dim> &rvec, double r) {
                if (r > 0.0)
                    cross += kernel.gradient(rvec, r) * c.particles->volumes[k];
            });
            total += c.p0 * cross;
        }
        outer.accelerations[i] = (-2.0 * outer.volumes[i] / outer.masses[i]) * total;
    }
}

struct TimeStep
{
    double dt = 0.0;
    double max_acceleration = 0.0;
    bool converged = false; ///< every acceleration is exactly zero
};

/// dt = CFL sqrt(h / max |F|).
template <int Dim>
TimeStep relax_time_step(const ParticleSet<Dim> &set, const RelaxationConfig &cfg)
{
    TimeStep ts;
    for (const auto &a : set.accelerations)
        ts.max_acceleration = std::max(ts.max_acceleration, a.norm());
    const double h = set.smoothing_length;
    if (ts.max_acceleration == 0.0)
    {
        ts.converged = true;
        ts.dt = cfg.cfl * std::sqrt(h / (1e-12 * h));
        return ts;
    }
    ts.dt = cfg.cfl * std::sqrt(h / ts.max_acceleration);
    return ts;
}

/// r += F dt^2 / 2, starting every step from rest.
template <int Dim>
void advance_positions(ParticleSet<Dim> &set, double dt)
{
    const double half_dt2 = 0.5 * dt * dt;
    for (std::size_t i = 0; i < set.size(); ++i)
        set.positions[i] += half_dt2 * set.accelerations[i];
}

struct BoundingStats
{
    std::size_t moved = 0;
    std::size_t skipped = 0; ///< undefined normal
};

/// Moves every particle with phi >= -dx/2 back onto the surface phi = -dx/2
/// along the level-set normal.
template <int Dim>
BoundingStats surface_bound(ParticleSet<Dim> &set, const LevelSetField<Dim> &field)
{
    BoundingStats stats;
    const double half = 0.5 * set.spacing;
    for (auto &r : set.positions)
    {
        const double phi = field.interpolate(r);
        if (phi < -half)
            continue;
        const auto n = field.try_normal(r);
        if (!n)
        {
            ++stats.skipped;
            continue;
        }
        r -= (phi + half) * *n;
        ++stats.moved;
    }
    return stats;
}

struct StepRecord
{
    int step = 0;
    double dt = 0.0;
    double e_all = 0.0;
    double e_interface = 0.0;
    double e_normalized = 0.0;
};

struct BodyHistory
{
    std::vector<StepRecord> steps;
    bool converged = false;
};

struct RelaxationResult
{
    bool converged = false;
    int steps = 0;
    /// Indexed by body id (0 = outer body).
    std::vector<BodyHistory> histories;
    /// Bounding moves skipped because the normal was undefined.
    std::size_t skipped_bounds = 0;
};

/// Called after every completed step with the zero-based step index.
template <int Dim>
using StepObserver = std::function<void(int, const MultiBodySystem<Dim> &)>;

namespace detail
{

/// Normalizes the convergence metric by its value at the first step.
class EnergyNormalizer
{
  public:
    double operator()(double metric)
    {
        if (!initial_)
            initial_ = metric;
        return *initial_ > 0.0 ? metric / *initial_ : 0.0;
    }

  private:
    std::optional<double> initial_;
};

template <int Dim>
bool record_step(BodyHistory &history, EnergyNormalizer &norm, int step, const TimeStep &ts, double e_all,
                 double e_interface, bool interface_metric, const RelaxationConfig &cfg)
{
    StepRecord rec{step, ts.dt, e_all, e_interface, 0.0};
    rec.e_normalized = norm(interface_metric ? e_interface : e_all);
    history.steps.push_back(rec);
    history.converged = ts.converged || rec.e_normalized < cfg.threshold;
    return history.converged;
}

/// One relaxation step of a body that bounds and confines on `field`.
template <int Dim>
TimeStep confined_step(ParticleSet<Dim> &set, CellList<Dim> &list, const LevelSetField<Dim> &field, double p0,
                       double list_cell, const RelaxationConfig &cfg, std::size_t &skipped)
{
    pressure_force_confined(set, list, field, p0);
    const TimeStep ts = relax_time_step(set, cfg);
    advance_positions(set, ts.dt);
    skipped += surface_bound(set, field).skipped;
    list = build_cell_list(set, list_cell);
    return ts;
}

} // namespace detail

/**
 * Relaxes one body inside its own boundary until the normalized kinetic
 * energy falls below the threshold or the step limit is reached.
 */
template <int Dim>
RelaxationResult relax_single_body(ParticleSet<Dim> &set, const LevelSetField<Dim> &field,
                                   const RelaxationConfig &cfg, double p0 = 1.0,
                                   const std::type_identity_t<std::function<void(int, const ParticleSet<Dim> &)>> &observer = {})
{
    cfg.validate();
    if (set.size() == 0)
        throw Error("cannot relax an empty particle set");
    RelaxationResult result;
    result.histories.resize(1);
    detail::EnergyNormalizer norm;
    const double cell = set.kernel().cutoff();
    CellList<Dim> list = build_cell_list(set, cell);
    for (int step = 0; step < cfg.max_steps; ++step)
    {
        const TimeStep ts = detail::confined_step(set, list, field, p0, cell, cfg, result.skipped_bounds);
        // energy of the step just taken uses the forces that drove it
        const double e = kinetic_energy<Dim>(set, ts.dt);
        result.steps = step + 1;
        const bool done =
            detail::record_step<Dim>(result.histories[0], norm, step, ts, e, 0.0, false, cfg);
        if (observer)
            observer(step, set);
        if (done)
        {
            result.converged = true;
            break;
        }
    }
    return result;
}

template <int Dim>
void check_interface_consistency(const MultiBodySystem<Dim> &system)
{
    if (system.inner.empty())
        return;
    if (interface_disagreement(system) > 2.0 * system.outer.field.spacing())
        throw GeometryError("geometry fields inconsistent - rebuild with Boolean subtraction");
}

namespace detail
{

template <int Dim>
RelaxationResult relax_system(MultiBodySystem<Dim> &system, const RelaxationConfig &cfg, bool complex,
                              const StepObserver<Dim> &observer)
{
    cfg.validate();
    const std::size_t n_inner = system.inner.size();
    const double cell = search_radius(system);
    const LevelSetField<Dim> &outer_bound = complex ? *system.outer.boundary : system.outer.field;
    if (!outer_bound.has_band())
        throw Error("outer body has no confinement band for this relaxation mode");

    std::vector<CellList<Dim>> inner_lists;
    for (const auto &b : system.inner)
        inner_lists.push_back(build_cell_list(b.particles, cell));
    CellList<Dim> outer_list = build_cell_list(system.outer.particles, cell);
    const auto inner_fields = system.inner_fields();

    RelaxationResult result;
    result.histories.resize(n_inner + 1);
    std::vector<EnergyNormalizer> norms(n_inner + 1);

    for (int step = 0; step < cfg.max_steps; ++step)
    {
        // inner solid bodies first, each on its own boundary
        for (std::size_t k = 0; k < n_inner; ++k)
        {
            auto &b = system.inner[k];
            const TimeStep ts = confined_step(b.particles, inner_lists[k], b.field, b.p0, cell, cfg, result.skipped_bounds);
            const double e = kinetic_energy<Dim>(b.particles, ts.dt);
            record_step<Dim>(result.histories[k + 1], norms[k + 1], step, ts, e, 0.0, false, cfg);
        }

        // outer fluid body
        auto &fluid = system.outer.particles;
        const auto layer = interface_layer<Dim>(fluid, inner_fields);
        if (complex)
        {
            std::vector<ContactBody<Dim>> contacts;
            for (std::size_t k = 0; k < n_inner; ++k)
                contacts.push_back({&system.inner[k].particles, &inner_lists[k], system.inner[k].p0});
            pressure_force_complex<Dim>(fluid, outer_list, contacts, outer_bound, system.outer.p0);
        }
        else
        {
            pressure_force_confined(fluid, outer_list, outer_bound, system.outer.p0);
        }
        const TimeStep ts = relax_time_step(fluid, cfg);
        const double e_all = kinetic_energy<Dim>(fluid, ts.dt);
        const double e_if = kinetic_energy<Dim>(fluid, ts.dt, layer);
        advance_positions(fluid, ts.dt);
        result.skipped_bounds += surface_bound(fluid, outer_bound).skipped;
        outer_list = build_cell_list(fluid, cell);
        const bool done = record_step<Dim>(result.histories[0], norms[0], step, ts, e_all, e_if, n_inner > 0, cfg);

        result.steps = step + 1;
        if (observer)
            observer(step, system);
        if (done)
        {
            result.converged = true;
            break;
        }
    }
    return result;
}

} // namespace detail

/**
 * Multi-body complex relaxation. Each step relaxes every inner body on its own
 * level set (confinement force, time step, update, bounding), then the outer
 * body with support from the contacting inner particles and confinement and
 * bounding on the external boundary only. Runs until the normalized energy of
 * the outer interface layer is below the threshold or the step limit is reached.
 */
template <int Dim>
RelaxationResult relax_complex(MultiBodySystem<Dim> &system, const RelaxationConfig &cfg,
                               const std::type_identity_t<StepObserver<Dim>> &observer = {})
{
    if (!system.outer.boundary)
        throw Error("complex relaxation needs the external boundary field");
    check_interface_consistency(system);
    return detail::relax_system(system, cfg, true, observer);
}

/// Every body relaxes independently on its own boundary; diagnostics of the
/// outer body still see the inner bodies.
template <int Dim>
RelaxationResult relax_separate(MultiBodySystem<Dim> &system, const RelaxationConfig &cfg,
                                const std::type_identity_t<StepObserver<Dim>> &observer = {})
{
    return detail::relax_system(system, cfg, false, observer);
}

template <int Dim>
RelaxationResult relax(MultiBodySystem<Dim> &system, const RelaxationConfig &cfg,
                       const std::type_identity_t<StepObserver<Dim>> &observer = {})
{
    return system.mode == RelaxationMode::complex ? relax_complex(system, cfg, observer)
                                                  : relax_separate(system, cfg, observer);
}

} // namespace sphrelax
