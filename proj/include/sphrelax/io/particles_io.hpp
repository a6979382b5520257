#pragma once

#include "sphrelax/diagnostics.hpp"
#include "sphrelax/io/format.hpp"
#include "sphrelax/relaxation.hpp"
#include "sphrelax/system.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sphrelax::io
{

template <int Dim>
std::string particle_csv_header(bool with_diagnostics)
{
    static const char *axes[] = {"x", "y", "z"};
    std::string h = "body_id";
    for (int k = 0; k < Dim; ++k)
        h += std::string(",") + axes[k];
    h += ",volume";
    if (with_diagnostics)
    {
        for (int k = 0; k < Dim; ++k)
            h += std::string(",kgs_") + axes[k];
        h += ",kgs_mag,density,interface_layer";
    }
    return h;
}

/// All bodies in id order. Diagnostic columns are written only with a report.
template <int Dim>
void write_particles_csv(std::ostream &out, const MultiBodySystem<Dim> &system,
                         const DiagnosticsReport<Dim> *report = nullptr)
{
    out << particle_csv_header<Dim>(report != nullptr) << '\n';
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
    {
        const auto &set = system.body(id).particles;
        for (std::size_t i = 0; i < set.size(); ++i)
        {
            out << id;
            for (int k = 0; k < Dim; ++k)
                out << ',' << format_double(set.positions[i][k]);
            out << ',' << format_double(set.volumes[i]);
            if (report)
            {
                const auto &d = report->bodies.at(static_cast<std::size_t>(id));
                for (int k = 0; k < Dim; ++k)
                    out << ',' << format_double(d.kgs[i][k]);
                out << ',' << format_double(d.kgs_magnitude[i]) << ',' << format_double(d.density[i]) << ','
                    << int(d.interface_layer[i]);
            }
            out << '\n';
        }
    }
}

template <int Dim>
struct ParticleRow
{
    int body_id = 0;
    Vec<Dim> position = Vec<Dim>::Zero();
    double volume = 0.0;
    std::optional<Vec<Dim>> kgs;
    double kgs_magnitude = 0.0;
    double density = 0.0;
    bool interface_layer = false;

    bool operator==(const ParticleRow &) const = default;
};

/// Reads either CSV layout written by write_particles_csv.
template <int Dim>
std::vector<ParticleRow<Dim>> read_particles_csv(std::istream &in, const std::string &source = "<particles>")
{
    std::string line;
    if (!std::getline(in, line))
        throw Error(source + ": empty particle file");
    const std::string header(trim(line));
    bool diag = false;
    if (header == particle_csv_header<Dim>(true))
        diag = true;
    else if (header != particle_csv_header<Dim>(false))
        throw Error(source + ":1: unexpected header '" + header + "'");
    const std::size_t columns = split(header, ',').size();

    std::vector<ParticleRow<Dim>> rows;
    int lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto f = split(line, ',');
        const auto fail = [&](const std::string &what) {
            return Error(source + ":" + std::to_string(lineno) + ": " + what);
        };
        if (f.size() != columns)
            throw fail("expected " + std::to_string(columns) + " columns");
        const auto num = [&](std::size_t c) {
            const auto v = parse_double(f[c]);
            if (!v)
                throw fail("unparsable value '" + std::string(f[c]) + "'");
            return *v;
        };
        ParticleRow<Dim> r;
        const auto id = parse_integer(f[0]);
        if (!id || *id < 0)
            throw fail("invalid body id");
        r.body_id = static_cast<int>(*id);
        for (int k = 0; k < Dim; ++k)
            r.position[k] = num(1 + k);
        r.volume = num(1 + Dim);
        if (diag)
        {
            Vec<Dim> g;
            for (int k = 0; k < Dim; ++k)
                g[k] = num(2 + Dim + k);
            r.kgs = g;
            r.kgs_magnitude = num(2 + 2 * Dim);
            r.density = num(3 + 2 * Dim);
            r.interface_layer = num(4 + 2 * Dim) != 0.0;
        }
        rows.push_back(r);
    }
    return rows;
}

/// Replaces every body's particles with the rows carrying its id.
template <int Dim>
void assign_particles(MultiBodySystem<Dim> &system, const std::vector<ParticleRow<Dim>> &rows)
{
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
    {
        auto &set = system.body(id).particles;
        set.positions.clear();
        set.accelerations.clear();
        set.volumes.clear();
        set.masses.clear();
    }
    for (const auto &r : rows)
    {
        if (r.body_id >= static_cast<int>(system.body_count()))
            throw Error("particle file references unknown body id " + std::to_string(r.body_id));
        auto &set = system.body(r.body_id).particles;
        set.positions.push_back(r.position);
        set.accelerations.push_back(Vec<Dim>::Zero());
        set.volumes.push_back(r.volume);
        set.masses.push_back(set.rest_density * r.volume);
    }
}

/// Legacy ASCII VTK unstructured grid of vertex cells with the same
/// per-particle quantities as the CSV.
template <int Dim>
void write_particles_vtk(std::ostream &out, const MultiBodySystem<Dim> &system,
                         const DiagnosticsReport<Dim> *report = nullptr)
{
    std::size_t n = 0;
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
        n += system.body(id).particles.size();
    const auto each = [&](auto &&f) {
        for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
            for (std::size_t i = 0; i < system.body(id).particles.size(); ++i)
                f(id, i);
    };

    out << "# vtk DataFile Version 3.0\nsphrelax particles\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    each([&](int id, std::size_t i) {
        const auto &p = system.body(id).particles.positions[i];
        out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << (Dim == 3 ? format_double(p[Dim - 1]) : "0")
            << '\n';
    });
    out << "CELLS " << n << ' ' << 2 * n << '\n';
    for (std::size_t i = 0; i < n; ++i)
        out << "1 " << i << '\n';
    out << "CELL_TYPES " << n << '\n';
    for (std::size_t i = 0; i < n; ++i)
        out << "1\n";
    out << "POINT_DATA " << n << '\n';
    out << "SCALARS body_id int 1\nLOOKUP_TABLE default\n";
    each([&](int id, std::size_t) { out << id << '\n'; });
    out << "SCALARS volume double 1\nLOOKUP_TABLE default\n";
    each([&](int id, std::size_t i) { out << format_double(system.body(id).particles.volumes[i]) << '\n'; });
    if (!report)
        return;
    const auto diag = [&](int id) -> const BodyDiagnostics<Dim> & {
        return report->bodies.at(static_cast<std::size_t>(id));
    };
    out << "VECTORS kgs double\n";
    each([&](int id, std::size_t i) {
        const auto &g = diag(id).kgs[i];
        out << format_double(g[0]) << ' ' << format_double(g[1]) << ' ' << (Dim == 3 ? format_double(g[Dim - 1]) : "0")
            << '\n';
    });
    out << "SCALARS kgs_mag double 1\nLOOKUP_TABLE default\n";
    each([&](int id, std::size_t i) { out << format_double(diag(id).kgs_magnitude[i]) << '\n'; });
    out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    each([&](int id, std::size_t i) { out << format_double(diag(id).density[i]) << '\n'; });
    out << "SCALARS interface_layer int 1\nLOOKUP_TABLE default\n";
    each([&](int id, std::size_t i) { out << int(diag(id).interface_layer[i]) << '\n'; });
}

inline void write_energy_history(std::ostream &out, const BodyHistory &history)
{
    out << "step,dt,E_all,E_interface,E_normalized\n";
    for (const auto &r : history.steps)
        out << r.step << ',' << format_double(r.dt) << ',' << format_double(r.e_all) << ','
            << format_double(r.e_interface) << ',' << format_double(r.e_normalized) << '\n';
}

/// Writes `text` to `path`, failing loudly on any stream error.
inline void write_text_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("cannot write " + path.string());
}

template <class F>
std::string render_to_string(F &&f)
{
    std::ostringstream ss;
    f(ss);
    return ss.str();
}

} // namespace sphrelax::io
