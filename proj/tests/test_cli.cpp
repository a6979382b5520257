#include "fixtures.hpp"

#include "sphrelax/io/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sphrelax;

namespace
{

const char *disk_config = R"([run]
dx = 0.05
threshold = 0.01
max_steps = 2000

[domain]
type = box
min = 0, 0
max = 1, 1

[body.disk]
type = circle
center = 0.5, 0.5
radius = 0.25
)";

struct Cli
{
    std::ostringstream out, log;

    int operator()(std::vector<std::string> args)
    {
        args.insert(args.begin(), "sphrelax");
        std::vector<const char *> argv;
        for (const auto &a : args)
            argv.push_back(a.c_str());
        return io::cli_main(static_cast<int>(argv.size()), argv.data(), out, log);
    }
};

std::filesystem::path write_config(const std::filesystem::path &dir, const std::string &text)
{
    const auto path = dir / "run.cfg";
    io::write_text_file(path, text);
    return path;
}

std::string slurp(const std::filesystem::path &p) { return io::read_file_bytes(p); }

} // namespace

TEST(Cli, RelaxWritesOutputs)
{
    const auto dir = fixtures::temp_dir("cli_relax");
    const auto cfg = write_config(dir, disk_config);
    Cli cli;
    EXPECT_EQ(cli({"relax", "--config", cfg.string(), "--output-dir", (dir / "out").string()}), 0) << cli.log.str();
    for (const char *f : {"particles.csv", "particles.vtk", "energy_history.csv", "energy_history.disk.csv"})
        EXPECT_TRUE(std::filesystem::is_regular_file(dir / "out" / f)) << f;
    EXPECT_NE(cli.log.str().find("converged"), std::string::npos);
    EXPECT_TRUE(cli.out.str().empty());
    const std::string csv = slurp(dir / "out" / "particles.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), io::particle_csv_header<2>(true));
    const std::string hist = slurp(dir / "out" / "energy_history.csv");
    EXPECT_EQ(hist.substr(0, hist.find('\n')), "step,dt,E_all,E_interface,E_normalized");
}

TEST(Cli, StepLimitExitsTwoAndStillWrites)
{
    const auto dir = fixtures::temp_dir("cli_limit");
    std::string text = disk_config;
    text.replace(text.find("max_steps = 2000"), 16, "max_steps = 1");
    const auto cfg = write_config(dir, text + "");
    Cli cli;
    EXPECT_EQ(cli({"relax", "--config", cfg.string(), "--output-dir", (dir / "out").string()}), 2);
    EXPECT_TRUE(std::filesystem::is_regular_file(dir / "out" / "particles.csv"));
    EXPECT_TRUE(std::filesystem::is_regular_file(dir / "out" / "energy_history.csv"));
    const std::string hist = slurp(dir / "out" / "energy_history.csv");
    EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 2);
}

TEST(Cli, MissingConfigExitsOne)
{
    Cli cli;
    EXPECT_EQ(cli({"relax", "--config", "/nonexistent/run.cfg"}), 1);
    EXPECT_NE(cli.log.str().find("cannot open config"), std::string::npos);
    EXPECT_EQ(cli({"relax"}), 1);
    EXPECT_EQ(cli({"frobnicate"}), 1);
}

TEST(Cli, InvalidConfigExitsOne)
{
    const auto dir = fixtures::temp_dir("cli_invalid");
    std::string text = disk_config;
    text.replace(text.find("dx = 0.05"), 9, "dx = -0.1");
    const auto cfg = write_config(dir, text);
    Cli cli;
    EXPECT_EQ(cli({"seed", "--config", cfg.string()}), 1);
    EXPECT_NE(cli.log.str().find("dx"), std::string::npos);
}

TEST(Cli, Version)
{
    Cli cli;
    EXPECT_EQ(cli({"version"}), 0);
    EXPECT_EQ(cli.out.str(), std::string("sphrelax ") + version_string + "\n");
}

TEST(Cli, SeedThenDiagnose)
{
    const auto dir = fixtures::temp_dir("cli_diag");
    const auto cfg = write_config(dir, disk_config);
    Cli cli;
    ASSERT_EQ(cli({"seed", "--config", cfg.string(), "--output-dir", (dir / "seed").string()}), 0) << cli.log.str();
    const std::string seeded = slurp(dir / "seed" / "particles.csv");
    EXPECT_EQ(seeded.substr(0, seeded.find('\n')), io::particle_csv_header<2>(false));
    ASSERT_EQ(cli({"diagnose", "--config", cfg.string(), "--particles", (dir / "seed" / "particles.csv").string(),
                   "--output-dir", (dir / "diag").string()}),
              0)
        << cli.log.str();
    const std::string diag = slurp(dir / "diag" / "particles.csv");
    EXPECT_EQ(diag.substr(0, diag.find('\n')), io::particle_csv_header<2>(true));
    EXPECT_EQ(std::count(diag.begin(), diag.end(), '\n'), std::count(seeded.begin(), seeded.end(), '\n'));
    EXPECT_EQ(cli({"diagnose", "--config", cfg.string(), "--particles", (dir / "missing.csv").string()}), 1);
}

TEST(Cli, RepeatedRunsAreByteIdentical)
{
    const auto dir = fixtures::temp_dir("cli_determinism");
    std::string text = disk_config;
    text.replace(text.find("max_steps = 2000"), 16, "max_steps = 40");
    const auto cfg = write_config(dir, text);
    Cli cli;
    cli({"relax", "--config", cfg.string(), "--output-dir", (dir / "a").string()});
    cli({"relax", "--config", cfg.string(), "--output-dir", (dir / "b").string()});
    for (const char *f : {"particles.csv", "particles.vtk", "energy_history.csv"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST(Cli, ModesAgreeWithoutInnerBodies)
{
    const auto dir = fixtures::temp_dir("cli_modes");
    const std::string base = "[run]\ndx = 0.1\nmax_steps = 30\nmode = ";
    const std::string rest = "\n\n[domain]\ntype = circle\ncenter = 0, 0\nradius = 1\n";
    Cli cli;
    for (const char *mode : {"complex", "separate"})
    {
        const auto cfg = write_config(dir, base + mode + rest);
        cli({"relax", "--config", cfg.string(), "--output-dir", (dir / mode).string()});
    }
    EXPECT_EQ(slurp(dir / "complex" / "particles.csv"), slurp(dir / "separate" / "particles.csv"));
}

TEST(Cli, OutputFormatSelection)
{
    const auto dir = fixtures::temp_dir("cli_formats");
    std::string text = disk_config;
    text.replace(text.find("[domain]"), 8, "output_formats = vtk\noutput_dir = only_vtk\n\n[domain]");
    const auto cfg = write_config(dir, text);
    Cli cli;
    ASSERT_EQ(cli({"seed", "--config", cfg.string()}), 0) << cli.log.str();
    EXPECT_TRUE(std::filesystem::is_regular_file(dir / "only_vtk" / "particles.vtk"));
    EXPECT_FALSE(std::filesystem::exists(dir / "only_vtk" / "particles.csv"));
}

TEST(Cli, SampleConfigsParse)
{
    for (const auto &entry : std::filesystem::directory_iterator(SPHRELAX_SAMPLES_DIR))
        if (entry.path().extension() == ".cfg")
            EXPECT_NO_THROW(io::load_config(entry.path())) << entry.path();
}
