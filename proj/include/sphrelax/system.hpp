#pragma once

#include "sphrelax/level_set.hpp"
#include "sphrelax/particles.hpp"
#include "sphrelax/shape.hpp"

#include <string>
#include <vector>

namespace sphrelax
{

/// The three compared treatments of a multi-body system.
enum class RelaxationMode
{
    complex,           ///< Boolean geometry, fluid takes support from contacting solids
    separate,          ///< Boolean geometry, every body relaxes on its own boundary
    separate_no_boolean ///< independent meshes per body, every body relaxes on its own boundary
};

inline const char *to_string(RelaxationMode mode)
{
    switch (mode)
    {
    case RelaxationMode::complex:
        return "complex";
    case RelaxationMode::separate:
        return "separate";
    default:
        return "separate-no-boolean";
    }
}

template <int Dim>
struct Body
{
    std::string name;
    ParticleSet<Dim> particles;
    /// Geometry of the body itself. For the outer body this is the domain
    /// minus the inner bodies. Carries the confinement band whenever the
    /// body relaxes on its own boundary.
    LevelSetField<Dim> field;
    /// Outer body only: the external (non-contact) boundary with its
    /// confinement band, used by complex relaxation.
    std::optional<LevelSetField<Dim>> boundary;
    double p0 = 1.0;
};

/// Outer fluid body surrounding any number of inner solid bodies. Body id 0
/// is the outer body, inner body k has id k + 1.
template <int Dim>
struct MultiBodySystem
{
    RelaxationMode mode = RelaxationMode::complex;
    Body<Dim> outer;
    std::vector<Body<Dim>> inner;

    std::size_t body_count() const { return inner.size() + 1; }

    const Body<Dim> &body(int id) const
    {
        if (id == 0)
            return outer;
        if (id < 0 || static_cast<std::size_t>(id) > inner.size())
            throw Error("unknown body id " + std::to_string(id));
        return inner[static_cast<std::size_t>(id - 1)];
    }

    Body<Dim> &body(int id) { return const_cast<Body<Dim> &>(std::as_const(*this).body(id)); }

    std::vector<const LevelSetField<Dim> *> inner_fields() const
    {
        std::vector<const LevelSetField<Dim> *> out;
        for (const auto &b : inner)
            out.push_back(&b.field);
        return out;
    }
};

template <int Dim>
struct BodySpec
{
    std::string name;
    Shape<Dim> shape;
    double p0 = 1.0;
};

template <int Dim>
struct SystemSpec
{
    BodySpec<Dim> domain;
    std::vector<BodySpec<Dim>> inner;
    double spacing = 0.0;
    double level_set_spacing = 0.0; ///< 0 selects spacing / 2
    double h_solid = 1.05;          ///< smoothing length / spacing, inner bodies
    double h_fluid = 1.3;           ///< smoothing length / spacing, outer body
    double eps_factor = 0.75;       ///< Heaviside half width / level-set spacing
    double rest_density = 1.0;
    RelaxationMode mode = RelaxationMode::complex;
};

namespace detail
{

/// Padding around a body surface large enough for the confinement band and
/// its kernel stencil, rounded up to whole particle spacings so lattices stay
/// aligned with the surface bounding box.
inline double field_padding(double spacing, double level_set_spacing, double cutoff)
{
    const double need = 2.0 * cutoff + 3.0 * level_set_spacing;
    return std::ceil(need / spacing - 1e-9) * spacing;
}

template <int Dim>
BoundingBox<Dim> finite_bounds(const Shape<Dim> &shape, const std::string &name)
{
    const BoundingBox<Dim> box = shape.surface_bounds();
    if (!box.lower.allFinite() || !box.upper.allFinite())
        throw GeometryError("body '" + name + "' must be bounded");
    return box;
}

} // namespace detail

/// Largest |phi_outer + phi_inner| over outer cell centres lying within two
/// level-set cells of an inner interface.
template <int Dim>
double interface_disagreement(const MultiBodySystem<Dim> &system)
{
    const auto &outer = system.outer.field;
    const double width = 2.0 * outer.spacing();
    double worst = 0.0;
    for (std::size_t c = 0; c < outer.cell_count(); ++c)
    {
        if (std::abs(outer.phi(c)) > width)
            continue;
        const Vec<Dim> x = outer.cell_center(c);
        for (const auto &b : system.inner)
        {
            const auto phi = b.field.try_interpolate(x);
            if (phi && std::abs(*phi) <= width)
                worst = std::max(worst, std::abs(outer.phi(c) + *phi));
        }
    }
    return worst;
}

/**
 * Builds level-set fields and lattice-seeded particles for every body.
 *
 * With Boolean geometry all fields share one background mesh anchored at the
 * padded domain and the outer field is the cell-wise subtraction of the inner
 * fields from the domain field. Without it every inner body gets its own mesh
 * anchored at its bounding box and the outer body samples the exact
 * subtraction on the domain mesh.
 */
template <int Dim>
MultiBodySystem<Dim> build_system(const SystemSpec<Dim> &spec)
{
    if (!(spec.spacing > 0.0))
        throw Error("particle spacing must be positive");
    const double dx = spec.spacing;
    const double lf = spec.level_set_spacing > 0.0 ? spec.level_set_spacing : 0.5 * dx;
    const double eps = spec.eps_factor * lf;
    const WendlandC2<Dim> solid_kernel(spec.h_solid * dx);
    const WendlandC2<Dim> fluid_kernel(spec.h_fluid * dx);
    const double pad = detail::field_padding(dx, lf, std::max(solid_kernel.cutoff(), fluid_kernel.cutoff()));

    const BoundingBox<Dim> domain_box = detail::finite_bounds(spec.domain.shape, spec.domain.name);
    const BoundingBox<Dim> global = domain_box.padded(pad);

    MultiBodySystem<Dim> system;
    system.mode = spec.mode;

    std::vector<Shape<Dim>> inner_shapes;
    for (std::size_t k = 0; k < spec.inner.size(); ++k)
    {
        const auto &b = spec.inner[k];
        detail::finite_bounds(b.shape, b.name);
        inner_shapes.push_back(b.shape);
        const BoundingBox<Dim> box =
            spec.mode == RelaxationMode::separate_no_boolean ? b.shape.surface_bounds().padded(pad) : global;
        LevelSetField<Dim> field = precompute_confinement(build_level_set(b.shape, box, lf), solid_kernel, eps);
        ParticleSet<Dim> particles = lattice_seed(field, dx, BodyRole::inner_solid, static_cast<int>(k + 1),
                                                  spec.h_solid, spec.rest_density);
        system.inner.push_back(Body<Dim>{b.name, std::move(particles), std::move(field), std::nullopt, b.p0});
    }
    // validates that every inner shape lies inside the domain
    const Shape<Dim> fluid_shape = Shape<Dim>::subtract(spec.domain.shape, inner_shapes);

    std::optional<LevelSetField<Dim>> outer_field;
    if (spec.mode == RelaxationMode::separate_no_boolean)
    {
        outer_field = build_level_set(fluid_shape, global, lf);
    }
    else
    {
        LevelSetField<Dim> domain_field = build_level_set(spec.domain.shape, global, lf);
        const auto fields = system.inner_fields();
        outer_field = subtract_fields<Dim>(domain_field, fields);
        if (spec.mode == RelaxationMode::complex)
            system.outer.boundary = precompute_confinement(std::move(domain_field), fluid_kernel, eps);
    }
    if (spec.mode != RelaxationMode::complex)
        outer_field = precompute_confinement(std::move(*outer_field), fluid_kernel, eps);

    system.outer.name = spec.domain.name;
    system.outer.p0 = spec.domain.p0;
    system.outer.particles =
        lattice_seed(*outer_field, dx, BodyRole::outer_fluid, 0, spec.h_fluid, spec.rest_density);
    system.outer.field = std::move(*outer_field);
    return system;
}

} // namespace sphrelax
