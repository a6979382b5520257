// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "fixtures.hpp"

#include "sphrelax/io/cli.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace sphrelax;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::size_t nearest(const ParticleSet<2> &set, const Vec2 &p)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < set.size(); ++i)
        if ((set.positions[i] - p).squaredNorm() < (set.positions[best] - p).squaredNorm())
            best = i;
    return best;
}

SystemSpec<2> disk_in_box(double dx, RelaxationMode mode)
{
    SystemSpec<2> spec;
    spec.domain = {"box", Shape<2>::box(Vec2(0, 0), Vec2(1, 1))};
    spec.inner.push_back({"disk", Shape<2>::ball(Vec2(0.5, 0.5), 0.25)});
    spec.spacing = dx;
    spec.mode = mode;
    return spec;
}

bool in_unit_box(const Vec2 &p) { return (p.array() > 0.0).all() && (p.array() < 1.0).all(); }

template <int Dim>
double quadrature_mass(double h)
{
    const WendlandC2<Dim> k(h);
    double s = 0.0;
    for (const auto &[r, w] : fixtures::gauss_legendre(40, 0.0, 2.0 * h))
        s += w * (Dim == 2 ? 2.0 * pi * r : 4.0 * pi * r * r) * k.value(r);
    return s;
}

template <int Dim>
double worst_fd_error(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const double h = 0.05, delta = 1e-5 * h;
    std::uniform_real_distribution<double> radius(0.02 * h, 1.98 * h);
    const WendlandC2<Dim> k(h);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
    {
        const double r = radius(rng);
        const double fd = (k.value(r + delta) - k.value(r - delta)) / (2.0 * delta);
        Vec<Dim> x = Vec<Dim>::Zero();
        x[0] = r;
        worst = std::max(worst, std::abs(k.gradient(x)[0] - fd) / std::abs(fd));
    }
    return worst;
}

Outcome kernel_correctness()
{
    const double e2 = std::abs(quadrature_mass<2>(0.7) - 1.0), e3 = std::abs(quadrature_mass<3>(0.7) - 1.0);
    const double fd = std::max(worst_fd_error<2>(7), worst_fd_error<3>(8));
    return {e2 <= 1e-4 && e3 <= 1e-4 && fd <= 1e-6,
            fmt("|int W - 1| = %.2e (2D) %.2e (3D), worst gradient rel. error %.2e", e2, e3, fd)};
}

Outcome lattice_consistency()
{
    const double dx = 0.04;
    const auto set = fixtures::lattice_block<2>(Vec2(0, 0), Vec2(1, 1), dx, BodyRole::outer_fluid);
    const auto kgs = kernel_gradient_summation<2>(set, build_cell_list(set, set.kernel().cutoff()));
    const double v = kgs[nearest(set, Vec2(0.5, 0.5))].norm() * dx;
    return {v <= 1e-10, fmt("|KGS|*dx = %.2e", v)};
}

template <class Inside>
int csg_mismatches(const Shape<2> &shape, Inside &&brute, double band, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.1, 1.1);
    int bad = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const Vec2 p(u(rng), u(rng));
        const double d = shape.signed_distance(p);
        if (std::abs(d) >= band)
            bad += (d < 0.0) != brute(p);
    }
    return bad;
}

Outcome geometry_oracles()
{
    const double l = 0.01;
    const auto box = Shape<2>::box(Vec2(0, 0), Vec2(1, 1));
    const auto disk = Shape<2>::ball(Vec2(0.5, 0.5), 0.25);
    const int m1 = csg_mismatches(Shape<2>::subtract(box, {disk}),
                                  [](const Vec2 &p) { return in_unit_box(p) && (p - Vec2(0.5, 0.5)).norm() >= 0.25; },
                                  l, 1);
    const Polygon z = fixtures::zigzag(0.004, 0.12, fixtures::generic_offset);
    const auto solid = Shape<2>::freeform(z);
    const int m2 = csg_mismatches(Shape<2>::subtract(box, {solid}),
                                  [&](const Vec2 &p) { return in_unit_box(p) && !z.contains(p); }, l, 2);
    const int m3 = csg_mismatches(solid, [&](const Vec2 &p) { return z.contains(p); }, l, 3);
    const double vol = io::load_stl(fixtures::data_dir() / "icosahedron.stl").volume();
    const double ev = std::abs(vol - fixtures::icosahedron_volume(1.0));
    return {m1 == 0 && m2 == 0 && m3 == 0 && ev <= 1e-9,
            fmt("mismatches disk-in-box %d, zigzag fluid %d, zigzag solid %d; icosahedron volume error %.1e", m1, m2,
                m3, ev)};
}

struct SingleBodyRun
{
    double final_energy = 0.0, min_energy = 0.0;
    int steps = 0;
    double worst_phi = 0.0, density_spread = 0.0;
    double worst_momentum = 0.0;
    double seconds = 0.0;
};

SingleBodyRun run_single_disk()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double dx = 1.0 / 25;
    SystemSpec<2> spec;
    spec.domain = {"disk", Shape<2>::ball(Vec2(0, 0), 1.0)};
    spec.spacing = dx;
    spec.mode = RelaxationMode::separate;
    auto sys = build_system(spec);
    auto &set = sys.outer.particles;
    const auto &field = sys.outer.field;
    RelaxationConfig cfg;
    cfg.max_steps = 5000;
    cfg.threshold = 1e-3;
    SingleBodyRun run;
    const auto res = relax_single_body(set, field, cfg, 1.0, [&](int, const ParticleSet<2> &s) {
        const auto kgs = kernel_gradient_summation<2>(s, build_cell_list(s, s.kernel().cutoff()));
        Vec2 total = Vec2::Zero();
        double scale = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            total += s.volumes[i] * kgs[i];
            scale += s.volumes[i] * kgs[i].norm();
        }
        run.worst_momentum = std::max(run.worst_momentum, total.norm() / scale);
    });
    const auto &h = res.histories[0].steps;
    run.steps = res.steps;
    run.final_energy = h.back().e_normalized;
    run.min_energy = 1.0;
    for (const auto &r : h)
        run.min_energy = std::min(run.min_energy, r.e_normalized);
    run.worst_phi = -1e300;
    for (const auto &p : set.positions)
        run.worst_phi = std::max(run.worst_phi, field.interpolate(p));
    const auto rho = density_summation(sys, 0);
    double lo = 1e300, hi = -1e300, sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (field.interpolate(set.positions[i]) < -set.kernel().cutoff())
        {
            lo = std::min(lo, rho[i]);
            hi = std::max(hi, rho[i]);
            sum += rho[i];
            ++n;
        }
    run.density_spread = (hi - lo) / (sum / n);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

const SingleBodyRun &single_disk()
{
    static const SingleBodyRun run = run_single_disk();
    return run;
}

Outcome single_body_convergence()
{
    const auto &r = single_disk();
    const double dx = 1.0 / 25;
    const bool energy = r.min_energy < 1e-3;
    const bool bound = r.worst_phi <= -0.5 * dx + 0.1 * dx;
    const bool density = r.density_spread <= 0.02;
    return {energy && bound && density && r.seconds < 60.0,
            fmt("min normalized KE %.3e over %d steps (final %.3e), max phi/dx %.3f, interior density spread %.4f, "
                "%.1f s",
                r.min_energy, r.steps, r.final_energy, r.worst_phi / dx, r.density_spread, r.seconds)};
}

Outcome complex_vs_separate()
{
    const double dx = 1.0 / 50;
    double kgs[2], energy[2];
    int steps[2];
    const RelaxationMode modes[] = {RelaxationMode::complex, RelaxationMode::separate};
    for (int m = 0; m < 2; ++m)
    {
        auto sys = build_system(disk_in_box(dx, modes[m]));
        const auto res = relax(sys, RelaxationConfig{});
        kgs[m] = diagnose(sys).interface_mean_kgs(dx);
        energy[m] = res.histories[0].steps.back().e_normalized;
        steps[m] = res.steps;
    }
    return {kgs[0] <= 0.5 * kgs[1] && energy[0] <= 0.1 * energy[1],
            fmt("interface |KGS|*dx %.3e vs %.3e, terminal interface KE %.3e (%d steps) vs %.3e (%d steps)", kgs[0],
                kgs[1], energy[0], steps[0], energy[1], steps[1])};
}

Outcome gap_reproduction()
{
    std::size_t conflicts[2];
    const RelaxationMode modes[] = {RelaxationMode::separate_no_boolean, RelaxationMode::complex};
    for (int m = 0; m < 2; ++m)
    {
        SystemSpec<2> spec;
        spec.domain = {"box", Shape<2>::box(Vec2(0, 0), Vec2(1, 1))};
        spec.inner.push_back({"zigzag", Shape<2>::freeform(fixtures::zigzag(0.004, 0.12, fixtures::generic_offset))});
        spec.spacing = 0.04;
        spec.mode = modes[m];
        const auto sys = build_system(spec);
        conflicts[m] = count_sign_conflicts<2>(sys.outer.field, sys.inner_fields(), 2 * sys.outer.field.spacing());
    }
    return {conflicts[0] >= 1 && conflicts[1] == 0,
            fmt("sign conflicts: independent meshes %zu, Boolean subtraction %zu", conflicts[0], conflicts[1])};
}

Outcome conservation_and_symmetry()
{
    const double momentum = single_disk().worst_momentum;
    const double dx = 1.0 / 25;
    SystemSpec<2> spec;
    spec.domain = {"box", Shape<2>::box(Vec2(0, 0), Vec2(1, 1))};
    spec.inner.push_back({"left", Shape<2>::ball(Vec2(0.3, 0.5), 0.12)});
    spec.inner.push_back({"right", Shape<2>::ball(Vec2(0.7, 0.5), 0.12)});
    spec.spacing = dx;
    auto sys = build_system(spec);
    const auto res = relax(sys, RelaxationConfig{});
    const auto mirror = [](const Vec2 &p) { return Vec2(1.0 - p.x(), p.y()); };
    double worst = 0.0;
    const auto check = [&](const ParticleSet<2> &from, const ParticleSet<2> &to) {
        for (const auto &p : from.positions)
            worst = std::max(worst, (to.positions[nearest(to, mirror(p))] - mirror(p)).norm());
    };
    check(sys.outer.particles, sys.outer.particles);
    check(sys.inner[0].particles, sys.inner[1].particles);
    check(sys.inner[1].particles, sys.inner[0].particles);
    return {momentum <= 1e-10 && worst <= 0.05 * dx,
            fmt("worst relative momentum %.2e; mirror mismatch %.2e dx after %d steps (%s)", momentum, worst / dx,
                res.steps, res.converged ? "converged" : "step limit")};
}

int run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "sphrelax");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, log;
    return io::cli_main(static_cast<int>(argv.size()), argv.data(), out, log);
}

Outcome determinism_and_round_trips()
{
    const auto dir = fixtures::temp_dir("acceptance");
    const std::string text = "[run]\ndx = 0.04\nmax_steps = 200\n\n[domain]\ntype = box\nmin = 0, 0\nmax = 1, 1\n\n"
                             "[body.disk]\ntype = circle\ncenter = 0.5, 0.5\nradius = 0.25\n";
    io::write_text_file(dir / "run.cfg", text);
    for (const char *d : {"a", "b"})
        run_cli({"relax", "--config", (dir / "run.cfg").string(), "--output-dir", (dir / d).string()});
    bool identical = true;
    for (const char *f : {"particles.csv", "particles.vtk", "energy_history.csv", "energy_history.disk.csv"})
    {
        const auto a = io::read_file_bytes(dir / "a" / f);
        identical &= !a.empty() && a == io::read_file_bytes(dir / "b" / f);
    }

    const auto cfg = io::parse_config(text);
    bool config_exact = io::parse_config(io::render_config(cfg)) == cfg;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-3, 0.3);
    for (int i = 0; i < 100; ++i)
    {
        auto c = cfg;
        c.dx = u(rng);
        c.threshold = u(rng) * 1e-3;
        c.bodies[0].shape.center = {u(rng), u(rng)};
        c.bodies[0].shape.radius = u(rng);
        config_exact &= io::parse_config(io::render_config(c)) == c;
    }

    auto sys = build_system(disk_in_box(0.05, RelaxationMode::complex));
    RelaxationConfig rc;
    rc.max_steps = 50;
    relax(sys, rc);
    const auto report = diagnose(sys);
    std::stringstream ss;
    io::write_particles_csv(ss, sys, &report);
    const auto rows = io::read_particles_csv<2>(ss);
    bool csv_exact = true;
    std::size_t k = 0;
    for (int id = 0; id < 2; ++id)
    {
        const auto &set = sys.body(id).particles;
        for (std::size_t i = 0; i < set.size(); ++i, ++k)
            csv_exact &= k < rows.size() && rows[k].body_id == id && rows[k].position == set.positions[i] &&
                         rows[k].volume == set.volumes[i] &&
                         rows[k].density == report.bodies[static_cast<std::size_t>(id)].density[i];
    }
    csv_exact &= k == rows.size();

    std::size_t neighbour_mismatch = 0;
    const double cutoff = 0.12;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        std::mt19937_64 g(seed);
        std::uniform_real_distribution<double> v(0.0, 1.0);
        auto cloud = make_particle_set<2>(0, BodyRole::outer_fluid, 0.05, 1.2);
        for (int i = 0; i < 500; ++i)
            cloud.push_back(Vec2(v(g), v(g)));
        const auto list = build_cell_list(cloud, cutoff);
        for (std::size_t i = 0; i < cloud.size(); ++i)
        {
            auto got = neighbors_within(list, cloud, i);
            std::sort(got.begin(), got.end());
            std::vector<std::size_t> want;
            for (std::size_t j = 0; j < cloud.size(); ++j)
                if (j != i && (cloud.positions[i] - cloud.positions[j]).norm() < cutoff)
                    want.push_back(j);
            neighbour_mismatch += got != want;
        }
    }
    std::filesystem::remove_all(dir);
    return {identical && config_exact && csv_exact && neighbour_mismatch == 0,
            fmt("repeated runs %s, config round-trips %s, CSV round-trip %s, neighbour mismatches %zu",
                identical ? "identical" : "differ", config_exact ? "exact" : "inexact", csv_exact ? "exact" : "inexact",
                neighbour_mismatch)};
}

Outcome smoke_3d()
{
    const double dx = 0.02;
    double kgs[2];
    int steps[2];
    const RelaxationMode modes[] = {RelaxationMode::complex, RelaxationMode::separate};
    RelaxationConfig cfg;
    cfg.max_steps = 300;
    for (int m = 0; m < 2; ++m)
    {
        SystemSpec<3> spec;
        spec.domain = {"box", Shape<3>::box(Vec3(0, 0, 0), Vec3(1, 1, 1))};
        spec.inner.push_back({"sphere", Shape<3>::ball(Vec3(0.5, 0.5, 0.5), 0.15)});
        spec.spacing = dx;
        spec.mode = modes[m];
        auto sys = build_system(spec);
        steps[m] = relax(sys, cfg).steps;
        kgs[m] = diagnose(sys).interface_mean_kgs(dx);
    }
    return {kgs[0] <= 0.2 && kgs[0] <= 0.5 * kgs[1],
            fmt("interface |KGS|*dx complex %.3e (%d steps), separate %.3e (%d steps)", kgs[0], steps[0], kgs[1],
                steps[1])};
}

} // namespace

int main()
{
    const std::pair<const char *, std::function<Outcome()>> criteria[] = {
        {"kernel correctness", kernel_correctness},
        {"lattice zero-order consistency", lattice_consistency},
        {"geometry oracles", geometry_oracles},
        {"single-body convergence", single_body_convergence},
        {"complex vs separate", complex_vs_separate},
        {"gap reproduction", gap_reproduction},
        {"conservation and symmetry", conservation_and_symmetry},
        {"determinism and round-trips", determinism_and_round_trips},
        {"3D smoke test", smoke_3d},
    };
    int failed = 0, n = 0;
    for (const auto &[name, run] : criteria)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", ++n, name, o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
