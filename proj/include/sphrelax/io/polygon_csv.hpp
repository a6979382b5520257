#pragma once

#include "sphrelax/io/format.hpp"
#include "sphrelax/polygon.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

namespace sphrelax::io
{

/**
 * Reads `x,y` vertex lines. Blank lines and `#` comments are ignored, the
 * polygon closes implicitly and a repeated first vertex at the end is
 * dropped. Errors carry the 1-based line of the offending vertex.
 */
inline Polygon read_polygon_csv(std::istream &in, const std::string &source = "<stream>")
{
    std::vector<Vec2> vertices;
    std::vector<int> lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#')
            continue;
        const auto fields = split(s, ',');
        const auto fail = [&](const std::string &what) {
            return GeometryError(source + ":" + std::to_string(lineno) + ": " + what);
        };
        if (fields.size() != 2)
            throw fail("expected 'x,y'");
        const auto x = parse_double(fields[0]);
        const auto y = parse_double(fields[1]);
        if (!x || !y)
            throw fail("unparsable coordinate");
        if (!std::isfinite(*x) || !std::isfinite(*y))
            throw fail("coordinate is not finite");
        vertices.emplace_back(*x, *y);
        lines.push_back(lineno);
    }
    if (vertices.size() > 1 && vertices.front() == vertices.back())
    {
        vertices.pop_back();
        lines.pop_back();
    }
    if (vertices.size() < 3)
        throw GeometryError(source + ": polygon needs at least 3 vertices, got " + std::to_string(vertices.size()));

    // self-intersection and duplicate checks reported by line
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i)
        if (vertices[i] == vertices[(i + 1) % n])
            throw GeometryError(source + ":" + std::to_string(lines[(i + 1) % n]) + ": repeated vertex");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j)
        {
            if (i == 0 && j == n - 1)
                continue;
            if (detail::segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
                throw GeometryError(source + ":" + std::to_string(lines[j]) +
                                    ": polygon is self-intersecting (edge starting at line " +
                                    std::to_string(lines[i]) + ")");
        }
    try
    {
        return Polygon(std::move(vertices));
    }
    catch (const GeometryError &e)
    {
        throw GeometryError(source + ": " + e.what());
    }
}

inline Polygon load_polygon_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open polygon file " + path.string());
    return read_polygon_csv(in, path.string());
}

inline void write_polygon_csv(const Polygon &polygon, std::ostream &out)
{
    for (const auto &v : polygon.vertices())
        out << format_double(v.x()) << ',' << format_double(v.y()) << '\n';
}

} // namespace sphrelax::io
