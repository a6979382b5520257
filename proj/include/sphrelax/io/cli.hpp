#pragma once

#include "sphrelax/io/config.hpp"
#include "sphrelax/io/particles_io.hpp"
#include "sphrelax/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace sphrelax::io
{

enum ExitCode : int
{
    exit_success = 0,
    exit_invalid = 1,
    exit_not_converged = 2,
};

namespace detail
{

struct Outputs
{
    std::filesystem::path dir;
    bool csv = true;
    bool vtk = true;
};

inline Outputs prepare_outputs(const RunConfig &cfg, const std::string &override_dir)
{
    Outputs o;
    o.dir = override_dir.empty() ? cfg.resolve(cfg.output_dir) : std::filesystem::path(override_dir);
    o.csv = std::find(cfg.output_formats.begin(), cfg.output_formats.end(), "csv") != cfg.output_formats.end();
    o.vtk = std::find(cfg.output_formats.begin(), cfg.output_formats.end(), "vtk") != cfg.output_formats.end();
    std::error_code ec;
    std::filesystem::create_directories(o.dir, ec);
    if (ec)
        throw Error("cannot create output directory " + o.dir.string() + ": " + ec.message());
    return o;
}

template <int Dim>
void write_distribution(const Outputs &o, const MultiBodySystem<Dim> &system, const DiagnosticsReport<Dim> *report)
{
    if (o.csv)
        write_text_file(o.dir / "particles.csv",
                        render_to_string([&](std::ostream &s) { write_particles_csv(s, system, report); }));
    if (o.vtk)
        write_text_file(o.dir / "particles.vtk",
                        render_to_string([&](std::ostream &s) { write_particles_vtk(s, system, report); }));
}

template <int Dim>
void warn_unresolved(const MultiBodySystem<Dim> &system, std::ostream &log)
{
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
    {
        const auto &b = system.body(id);
        if (const auto box = unresolved_region(b.field, b.particles))
        {
            log << "warning: body '" << b.name << "' has regions the lattice does not resolve, within [";
            for (int k = 0; k < Dim; ++k)
                log << (k ? ", " : "") << box->lower[k] << ".." << box->upper[k];
            log << "]\n";
        }
    }
}

template <int Dim>
int run_seed(const RunConfig &cfg, const Outputs &o, std::ostream &log)
{
    const auto system = build_system(make_system_spec<Dim>(cfg));
    warn_unresolved(system, log);
    write_distribution<Dim>(o, system, nullptr);
    for (int id = 0; id < static_cast<int>(system.body_count()); ++id)
        log << "body " << id << " '" << system.body(id).name << "': " << system.body(id).particles.size()
            << " particles\n";
    return exit_success;
}

template <int Dim>
int run_relax(const RunConfig &cfg, const Outputs &o, std::ostream &log)
{
    auto system = build_system(make_system_spec<Dim>(cfg));
    warn_unresolved(system, log);
    const RelaxationResult result = relax(system, make_relaxation_config(cfg));
    if (result.skipped_bounds)
        log << "warning: " << result.skipped_bounds << " bounding moves skipped at undefined normals\n";
    const auto report = diagnose(system);
    write_distribution<Dim>(o, system, &report);
    write_text_file(o.dir / "energy_history.csv",
                    render_to_string([&](std::ostream &s) { write_energy_history(s, result.histories[0]); }));
    for (std::size_t k = 0; k < system.inner.size(); ++k)
        write_text_file(o.dir / ("energy_history." + system.inner[k].name + ".csv"),
                        render_to_string([&](std::ostream &s) { write_energy_history(s, result.histories[k + 1]); }));
    log << to_string(cfg.mode) << " relaxation: " << result.steps << " steps, "
        << (result.converged ? "converged" : "not converged") << ", interface mean |KGS|*dx = "
        << report.interface_mean_kgs(cfg.dx) << '\n';
    return result.converged ? exit_success : exit_not_converged;
}

template <int Dim>
int run_diagnose(const RunConfig &cfg, const Outputs &o, const std::filesystem::path &particles, std::ostream &log)
{
    auto system = build_system(make_system_spec<Dim>(cfg));
    std::ifstream in(particles);
    if (!in)
        throw Error("cannot open particle file " + particles.string());
    assign_particles(system, read_particles_csv<Dim>(in, particles.string()));
    const auto report = diagnose(system);
    write_distribution<Dim>(o, system, &report);
    log << "interface mean |KGS|*dx = " << report.interface_mean_kgs(cfg.dx) << '\n';
    return exit_success;
}

template <class F>
int dispatch(const RunConfig &cfg, F &&f)
{
    return cfg.dimension() == 2 ? f(std::integral_constant<int, 2>{}) : f(std::integral_constant<int, 3>{});
}

} // namespace detail

/**
 * Command line entry point:
 *
 *   sphrelax seed     --config run.cfg [--output-dir dir]
 *   sphrelax relax    --config run.cfg [--output-dir dir]
 *   sphrelax diagnose --config run.cfg --particles particles.csv [--output-dir dir]
 *   sphrelax version
 *
 * Returns 0 on success, 1 on invalid input, 2 when relaxation stops at the
 * step limit (outputs are still written).
 */
inline int cli_main(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &log = std::cerr)
{
    CLI::App app{"Physics-driven particle relaxation for multi-body SPH systems", "sphrelax"};
    app.require_subcommand(1);
    std::string config_path, output_dir, particles_path;

    auto *seed = app.add_subcommand("seed", "write the initial lattice distribution");
    auto *relax_cmd = app.add_subcommand("relax", "relax the configured system and write diagnostics");
    auto *diag = app.add_subcommand("diagnose", "recompute diagnostics for an existing particle file");
    auto *version = app.add_subcommand("version", "print the version");
    for (auto *cmd : {seed, relax_cmd, diag})
    {
        cmd->add_option("--config", config_path, "run configuration file")->required();
        cmd->add_option("--output-dir", output_dir, "override the configured output directory");
    }
    diag->add_option("--particles", particles_path, "particle CSV to diagnose")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        out << app.help();
        return exit_success;
    }
    catch (const CLI::ParseError &e)
    {
        log << "error: " << e.what() << '\n';
        return exit_invalid;
    }

    if (version->parsed())
    {
        out << "sphrelax " << version_string << '\n';
        return exit_success;
    }
    try
    {
        const RunConfig cfg = load_config(config_path);
        const auto outputs = detail::prepare_outputs(cfg, output_dir);
        return detail::dispatch(cfg, [&](auto dim) {
            constexpr int D = decltype(dim)::value;
            if (seed->parsed())
                return detail::run_seed<D>(cfg, outputs, log);
            if (relax_cmd->parsed())
                return detail::run_relax<D>(cfg, outputs, log);
            return detail::run_diagnose<D>(cfg, outputs, particles_path, log);
        });
    }
    catch (const std::exception &e)
    {
        log << "error: " << e.what() << '\n';
        return exit_invalid;
    }
}

} // namespace sphrelax::io
