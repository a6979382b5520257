#pragma once

#include "sphrelax/io/format.hpp"
#include "sphrelax/io/polygon_csv.hpp"
#include "sphrelax/io/stl.hpp"
#include "sphrelax/relaxation.hpp"
#include "sphrelax/system.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace sphrelax::io
{

/// One geometry declaration as written in a config section.
struct ShapeDecl
{
    std::string type; ///< box | circle | sphere | polygon | stl
    std::vector<double> center;
    double radius = 0.0;
    std::vector<double> min;
    std::vector<double> max;
    std::string file; ///< as written; resolved against RunConfig::base_dir
    double p0 = 1.0;

    bool operator==(const ShapeDecl &) const = default;
};

struct BodyDecl
{
    std::string name;
    ShapeDecl shape;

    bool operator==(const BodyDecl &) const = default;
};

struct RunConfig
{
    double dx = 0.0;
    double level_set_spacing = 0.0;
    double h_solid = 1.05;
    double h_fluid = 1.3;
    double heaviside_eps_factor = 0.75;
    double cfl = 0.25;
    int max_steps = 10000;
    double threshold = 1e-4;
    RelaxationMode mode = RelaxationMode::complex;
    std::string output_dir = "output";
    std::vector<std::string> output_formats = {"csv", "vtk"};
    ShapeDecl domain;
    std::vector<BodyDecl> bodies;
    /// Directory relative paths are resolved against.
    std::filesystem::path base_dir;

    bool operator==(const RunConfig &) const = default;

    int dimension() const;

    std::filesystem::path resolve(const std::string &path) const
    {
        const std::filesystem::path p(path);
        return p.is_absolute() ? p : base_dir / p;
    }
};

inline std::optional<RelaxationMode> parse_mode(std::string_view s)
{
    if (s == "complex")
        return RelaxationMode::complex;
    if (s == "separate")
        return RelaxationMode::separate;
    if (s == "separate-no-boolean")
        return RelaxationMode::separate_no_boolean;
    return std::nullopt;
}

namespace detail
{

inline int shape_dimension(const ShapeDecl &s)
{
    if (s.type == "circle" || s.type == "polygon")
        return 2;
    if (s.type == "sphere" || s.type == "stl")
        return 3;
    return static_cast<int>(s.min.size());
}

struct Entry
{
    std::string value;
    int line = 0;
};

struct Section
{
    std::string name;
    int line = 0;
    std::map<std::string, Entry> entries;
};

class Reader
{
  public:
    explicit Reader(const Section &s) : section_(s) {}

    ConfigError error(const std::string &key, const std::string &what) const
    {
        const auto it = section_.entries.find(key);
        const int line = it == section_.entries.end() ? section_.line : it->second.line;
        return ConfigError("line " + std::to_string(line) + ": [" + section_.name + "] " + key + ": " + what);
    }

    bool has(const std::string &key) const { return section_.entries.count(key) != 0; }

    const std::string &text(const std::string &key) const
    {
        used_.insert(key);
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end())
            throw error(key, "missing required key");
        return it->second.value;
    }

    double number(const std::string &key) const
    {
        const auto v = parse_double(text(key));
        if (!v || !std::isfinite(*v))
            throw error(key, "unparsable number '" + text(key) + "'");
        return *v;
    }

    double positive(const std::string &key) const
    {
        const double v = number(key);
        if (!(v > 0.0))
            throw error(key, "must be positive");
        return v;
    }

    std::vector<double> vector(const std::string &key) const
    {
        std::vector<double> out;
        for (const auto tok : split(text(key), ','))
        {
            const auto v = parse_double(tok);
            if (!v || !std::isfinite(*v))
                throw error(key, "unparsable vector '" + text(key) + "'");
            out.push_back(*v);
        }
        if (out.size() != 2 && out.size() != 3)
            throw error(key, "expected 2 or 3 components");
        return out;
    }

    /// Every key present but never read is unknown.
    void reject_unused() const
    {
        for (const auto &[key, entry] : section_.entries)
            if (!used_.count(key))
                throw ConfigError("line " + std::to_string(entry.line) + ": [" + section_.name + "] unknown key '" +
                                  key + "'");
    }

  private:
    const Section &section_;
    mutable std::set<std::string> used_;
};

inline ShapeDecl read_shape(const Reader &r, const std::filesystem::path &base_dir)
{
    ShapeDecl s;
    s.type = r.text("type");
    if (r.has("p0"))
        s.p0 = r.positive("p0");
    if (s.type == "box")
    {
        s.min = r.vector("min");
        s.max = r.vector("max");
        if (s.min.size() != s.max.size())
            throw r.error("max", "dimension differs from 'min'");
        for (std::size_t k = 0; k < s.min.size(); ++k)
            if (!(s.max[k] > s.min[k]))
                throw r.error("max", "must exceed 'min' on every axis");
    }
    else if (s.type == "circle" || s.type == "sphere")
    {
        s.center = r.vector("center");
        const std::size_t want = s.type == "circle" ? 2 : 3;
        if (s.center.size() != want)
            throw r.error("center", "expected " + std::to_string(want) + " components");
        s.radius = r.positive("radius");
    }
    else if (s.type == "polygon" || s.type == "stl")
    {
        s.file = r.text("file");
        const std::filesystem::path p = std::filesystem::path(s.file).is_absolute() ? std::filesystem::path(s.file) : base_dir / s.file;
        if (!std::filesystem::is_regular_file(p))
            throw r.error("file", "no such file '" + p.string() + "'");
    }
    else
        throw r.error("type", "unknown shape type '" + s.type + "'");
    r.reject_unused();
    return s;
}

inline std::string render_vector(const std::vector<double> &v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out += (k ? ", " : "") + format_double(v[k]);
    return out;
}

inline void render_shape(std::ostream &out, const ShapeDecl &s)
{
    out << "type = " << s.type << '\n';
    if (s.type == "box")
        out << "min = " << render_vector(s.min) << "\nmax = " << render_vector(s.max) << '\n';
    else if (s.type == "circle" || s.type == "sphere")
        out << "center = " << render_vector(s.center) << "\nradius = " << format_double(s.radius) << '\n';
    else
        out << "file = " << s.file << '\n';
    out << "p0 = " << format_double(s.p0) << '\n';
}

} // namespace detail

inline int RunConfig::dimension() const { return detail::shape_dimension(domain); }

/**
 * Parses the run configuration grammar:
 *
 *   # comment
 *   [run]            dx, level_set_spacing, h_solid, h_fluid, heaviside_eps_factor,
 *                    cfl, max_steps, threshold, mode, output_dir, output_formats
 *   [domain]         type, center, radius, min, max, file, p0
 *   [body.<name>]    same keys as [domain], one section per inner body
 *
 * Relative file paths resolve against `base_dir`.
 */
inline RunConfig parse_config(std::string_view text, const std::filesystem::path &base_dir = {})
{
    std::vector<detail::Section> sections;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw))
    {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto fail = [&](const std::string &what) {
            return ConfigError("line " + std::to_string(lineno) + ": " + what);
        };
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw fail("malformed section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            const bool known = name == "run" || name == "domain" || (name.rfind("body.", 0) == 0 && name.size() > 5);
            if (!known)
                throw fail("unknown section [" + name + "]");
            for (const auto &s : sections)
                if (s.name == name)
                    throw fail("duplicate section [" + name + "]");
            sections.push_back({name, lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw fail("expected 'key = value'");
        if (sections.empty())
            throw fail("key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw fail("empty key");
        if (value.empty())
            throw fail("key '" + key + "' has no value");
        auto &entries = sections.back().entries;
        if (entries.count(key))
            throw fail("duplicate key '" + key + "'");
        entries[key] = {value, lineno};
    }

    const auto find = [&](const std::string &name) -> const detail::Section * {
        for (const auto &s : sections)
            if (s.name == name)
                return &s;
        return nullptr;
    };
    const detail::Section *run = find("run");
    if (!run)
        throw ConfigError("missing required section [run]");
    const detail::Section *domain = find("domain");
    if (!domain)
        throw ConfigError("missing required section [domain]");

    RunConfig cfg;
    cfg.base_dir = base_dir;
    {
        const detail::Reader r(*run);
        cfg.dx = r.positive("dx");
        cfg.level_set_spacing = r.has("level_set_spacing") ? r.positive("level_set_spacing") : 0.5 * cfg.dx;
        if (r.has("h_solid"))
            cfg.h_solid = r.positive("h_solid");
        if (r.has("h_fluid"))
            cfg.h_fluid = r.positive("h_fluid");
        if (r.has("heaviside_eps_factor"))
            cfg.heaviside_eps_factor = r.positive("heaviside_eps_factor");
        if (r.has("cfl"))
        {
            cfg.cfl = r.number("cfl");
            if (!(cfg.cfl > 0.0 && cfg.cfl <= 0.25))
                throw r.error("cfl", "must lie in (0, 0.25]");
        }
        if (r.has("max_steps"))
        {
            const auto v = parse_integer(r.text("max_steps"));
            if (!v || *v < 1 || *v > std::numeric_limits<int>::max())
                throw r.error("max_steps", "must be a positive integer");
            cfg.max_steps = static_cast<int>(*v);
        }
        if (r.has("threshold"))
            cfg.threshold = r.positive("threshold");
        if (r.has("mode"))
        {
            const auto m = parse_mode(r.text("mode"));
            if (!m)
                throw r.error("mode", "expected complex, separate or separate-no-boolean");
            cfg.mode = *m;
        }
        if (r.has("output_dir"))
            cfg.output_dir = r.text("output_dir");
        if (r.has("output_formats"))
        {
            cfg.output_formats.clear();
            for (const auto f : split(r.text("output_formats"), ','))
            {
                if (f != "csv" && f != "vtk")
                    throw r.error("output_formats", "unknown format '" + std::string(f) + "'");
                cfg.output_formats.emplace_back(f);
            }
        }
        r.reject_unused();
    }
    cfg.domain = detail::read_shape(detail::Reader(*domain), base_dir);
    const int dim = cfg.dimension();
    if (dim != 2 && dim != 3)
        throw ConfigError("line " + std::to_string(domain->line) + ": [domain] cannot infer dimension");
    for (const auto &s : sections)
    {
        if (s.name.rfind("body.", 0) != 0)
            continue;
        BodyDecl b{s.name.substr(5), detail::read_shape(detail::Reader(s), base_dir)};
        if (detail::shape_dimension(b.shape) != dim)
            throw ConfigError("line " + std::to_string(s.line) + ": [" + s.name + "] dimension differs from [domain]");
        cfg.bodies.push_back(std::move(b));
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try
    {
        return parse_config(ss.str(), path.parent_path());
    }
    catch (const ConfigError &e)
    {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Canonical text of a config; every field is written explicitly.
inline std::string render_config(const RunConfig &cfg)
{
    std::ostringstream out;
    out << "[run]\n"
        << "dx = " << format_double(cfg.dx) << '\n'
        << "level_set_spacing = " << format_double(cfg.level_set_spacing) << '\n'
        << "h_solid = " << format_double(cfg.h_solid) << '\n'
        << "h_fluid = " << format_double(cfg.h_fluid) << '\n'
        << "heaviside_eps_factor = " << format_double(cfg.heaviside_eps_factor) << '\n'
        << "cfl = " << format_double(cfg.cfl) << '\n'
        << "max_steps = " << cfg.max_steps << '\n'
        << "threshold = " << format_double(cfg.threshold) << '\n'
        << "mode = " << to_string(cfg.mode) << '\n'
        << "output_dir = " << cfg.output_dir << '\n'
        << "output_formats = ";
    for (std::size_t k = 0; k < cfg.output_formats.size(); ++k)
        out << (k ? ", " : "") << cfg.output_formats[k];
    out << "\n\n[domain]\n";
    detail::render_shape(out, cfg.domain);
    for (const auto &b : cfg.bodies)
    {
        out << "\n[body." << b.name << "]\n";
        detail::render_shape(out, b.shape);
    }
    return out.str();
}

template <int Dim>
Vec<Dim> to_vec(const std::vector<double> &v)
{
    if (v.size() != static_cast<std::size_t>(Dim))
        throw ConfigError("vector has " + std::to_string(v.size()) + " components, expected " + std::to_string(Dim));
    Vec<Dim> out;
    for (int k = 0; k < Dim; ++k)
        out[k] = v[static_cast<std::size_t>(k)];
    return out;
}

template <int Dim>
Shape<Dim> make_shape(const ShapeDecl &s, const RunConfig &cfg)
{
    if (s.type == "box")
        return Shape<Dim>::box(to_vec<Dim>(s.min), to_vec<Dim>(s.max));
    if (s.type == "circle" || s.type == "sphere")
        return Shape<Dim>::ball(to_vec<Dim>(s.center), s.radius);
    if constexpr (Dim == 2)
    {
        if (s.type == "polygon")
            return Shape<2>::freeform(load_polygon_csv(cfg.resolve(s.file)));
    }
    else
    {
        if (s.type == "stl")
            return Shape<3>::freeform(load_stl(cfg.resolve(s.file)));
    }
    throw ConfigError("shape type '" + s.type + "' is not available in " + std::to_string(Dim) + "D");
}

template <int Dim>
SystemSpec<Dim> make_system_spec(const RunConfig &cfg)
{
    SystemSpec<Dim> spec;
    spec.domain = {"domain", make_shape<Dim>(cfg.domain, cfg), cfg.domain.p0};
    for (const auto &b : cfg.bodies)
        spec.inner.push_back({b.name, make_shape<Dim>(b.shape, cfg), b.shape.p0});
    spec.spacing = cfg.dx;
    spec.level_set_spacing = cfg.level_set_spacing;
    spec.h_solid = cfg.h_solid;
    spec.h_fluid = cfg.h_fluid;
    spec.eps_factor = cfg.heaviside_eps_factor;
    spec.mode = cfg.mode;
    return spec;
}

inline RelaxationConfig make_relaxation_config(const RunConfig &cfg)
{
    RelaxationConfig r;
    r.cfl = cfg.cfl;
    r.max_steps = cfg.max_steps;
    r.threshold = cfg.threshold;
    return r;
}

} // namespace sphrelax::io
