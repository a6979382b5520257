#pragma once

#include "sphrelax/io/format.hpp"
#include "sphrelax/trimesh.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace sphrelax::io
{

struct StlSoup
{
    std::vector<std::array<Vec3, 3>> facets;
};

namespace detail
{

inline std::uint32_t read_u32_le(const unsigned char *p)
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float read_f32_le(const unsigned char *p)
{
    const std::uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

inline void put_u32_le(std::string &out, std::uint32_t v)
{
    for (int k = 0; k < 4; ++k)
        out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

inline void put_f32_le(std::string &out, float f)
{
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32_le(out, bits);
}

inline StlSoup parse_binary_stl(const std::string &bytes)
{
    const auto *data = reinterpret_cast<const unsigned char *>(bytes.data());
    const std::uint32_t n = read_u32_le(data + 80);
    StlSoup soup;
    soup.facets.reserve(n);
    for (std::uint32_t t = 0; t < n; ++t)
    {
        const unsigned char *rec = data + 84 + 50 * static_cast<std::size_t>(t);
        std::array<Vec3, 3> f;
        for (int v = 0; v < 3; ++v)
            for (int k = 0; k < 3; ++k)
                f[v][k] = read_f32_le(rec + 12 + 12 * v + 4 * k);
        soup.facets.push_back(f);
    }
    return soup;
}

inline StlSoup parse_ascii_stl(const std::string &text, const std::string &source)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    StlSoup soup;
    std::vector<Vec3> pending;
    bool in_solid = false;
    const auto fail = [&](const std::string &what) {
        return GeometryError(source + ":" + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line))
    {
        ++lineno;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word))
            continue;
        if (word == "solid")
            in_solid = true;
        else if (!in_solid)
            throw fail("malformed STL header");
        else if (word == "vertex")
        {
            std::string tok[3];
            if (!(ls >> tok[0] >> tok[1] >> tok[2]))
                throw fail("vertex needs three coordinates");
            Vec3 p;
            for (int k = 0; k < 3; ++k)
            {
                const auto v = parse_double(tok[k]);
                if (!v)
                    throw fail("unparsable vertex coordinate");
                p[k] = *v;
            }
            pending.push_back(p);
        }
        else if (word == "endloop")
        {
            if (pending.size() != 3)
                throw fail("facet loop must have exactly three vertices");
            soup.facets.push_back({pending[0], pending[1], pending[2]});
            pending.clear();
        }
        else if (word == "facet" || word == "outer" || word == "endfacet" || word == "endsolid")
            continue;
        else
            throw fail("unexpected token '" + word + "'");
    }
    if (!in_solid)
        throw GeometryError(source + ": malformed STL header");
    return soup;
}

} // namespace detail

/// Binary when the size matches 84 + 50 n for the stored facet count,
/// ASCII otherwise.
inline StlSoup parse_stl(const std::string &bytes, const std::string &source = "<stl>")
{
    if (bytes.size() >= 84)
    {
        const std::uint32_t n = detail::read_u32_le(reinterpret_cast<const unsigned char *>(bytes.data()) + 80);
        if (bytes.size() == 84 + 50 * static_cast<std::size_t>(n))
            return detail::parse_binary_stl(bytes);
    }
    if (bytes.rfind("solid", 0) != 0 && trim(bytes).rfind("solid", 0) != 0)
        throw GeometryError(source + ": malformed STL header");
    return detail::parse_ascii_stl(bytes, source);
}

/// Merges facet corners closer than `tolerance` into shared vertices.
inline TriMesh weld(const StlSoup &soup, double tolerance = 1e-9)
{
    using Key = std::array<long long, 3>;
    std::map<Key, std::vector<int>> grid;
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    const auto key_of = [&](const Vec3 &p) {
        Key k;
        for (int a = 0; a < 3; ++a)
            k[a] = static_cast<long long>(std::floor(p[a] / tolerance));
        return k;
    };
    const auto lookup = [&](const Vec3 &p) {
        if (!p.allFinite())
            throw GeometryError("STL vertex is not finite");
        const Key base = key_of(p);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dz = -1; dz <= 1; ++dz)
                {
                    const auto it = grid.find({base[0] + dx, base[1] + dy, base[2] + dz});
                    if (it == grid.end())
                        continue;
                    for (int v : it->second)
                        if ((vertices[static_cast<std::size_t>(v)] - p).norm() <= tolerance)
                            return v;
                }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(p);
        grid[base].push_back(id);
        return id;
    };
    for (const auto &f : soup.facets)
        triangles.push_back({lookup(f[0]), lookup(f[1]), lookup(f[2])});
    return TriMesh(std::move(vertices), std::move(triangles));
}

inline std::string read_file_bytes(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline TriMesh load_stl(const std::filesystem::path &path)
{
    const std::string bytes = read_file_bytes(path);
    try
    {
        return weld(parse_stl(bytes, path.string()));
    }
    catch (const GeometryError &e)
    {
        const std::string what = e.what();
        if (what.rfind(path.string(), 0) == 0)
            throw;
        throw GeometryError(path.string() + ": " + what);
    }
}

inline std::string render_stl_binary(const TriMesh &mesh)
{
    std::string out(80, '\0');
    const std::string tag = "sphrelax binary STL";
    std::copy(tag.begin(), tag.end(), out.begin());
    detail::put_u32_le(out, static_cast<std::uint32_t>(mesh.triangles().size()));
    for (const auto &t : mesh.triangles())
    {
        const Vec3 &a = mesh.vertices()[t[0]], &b = mesh.vertices()[t[1]], &c = mesh.vertices()[t[2]];
        const Vec3 n = (b - a).cross(c - a).normalized();
        for (int k = 0; k < 3; ++k)
            detail::put_f32_le(out, static_cast<float>(n[k]));
        for (const Vec3 *v : {&a, &b, &c})
            for (int k = 0; k < 3; ++k)
                detail::put_f32_le(out, static_cast<float>((*v)[k]));
        out.push_back('\0');
        out.push_back('\0');
    }
    return out;
}

inline std::string render_stl_ascii(const TriMesh &mesh, const std::string &name = "mesh")
{
    std::ostringstream out;
    out << "solid " << name << '\n';
    for (const auto &t : mesh.triangles())
    {
        const Vec3 &a = mesh.vertices()[t[0]], &b = mesh.vertices()[t[1]], &c = mesh.vertices()[t[2]];
        const Vec3 n = (b - a).cross(c - a).normalized();
        out << "  facet normal " << format_double(n.x()) << ' ' << format_double(n.y()) << ' '
            << format_double(n.z()) << "\n    outer loop\n";
        for (const Vec3 *v : {&a, &b, &c})
            out << "      vertex " << format_double(v->x()) << ' ' << format_double(v->y()) << ' '
                << format_double(v->z()) << '\n';
        out << "    endloop\n  endfacet\n";
    }
    out << "endsolid " << name << '\n';
    return out.str();
}

inline void write_file_bytes(const std::filesystem::path &path, const std::string &bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("cannot write " + path.string());
}

} // namespace sphrelax::io
