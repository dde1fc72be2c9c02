#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cpband/cli.hpp"
#include "cpband/io.hpp"

using namespace cpband;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cpband_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path p = scratch_dir() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"cpband"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing: values, comments, whitespace") {
    const fs::path p = write_file("basic.conf",
                                  "# a comment line\n"
                                  "surface = mobius   # trailing comment\n"
                                  "center_radius=1.5\n"
                                  "\n"
                                  "  half_width =  0.2 \n"
                                  "dx_list = 0.1, 0.05\n"
                                  "kappa = 2.5\n"
                                  "snapshots = 0, 10, 20\n"
                                  "dump_matrices = true\n");
    RunConfig cfg = parse_config_file(p);
    CHECK(cfg.surface == "mobius");
    CHECK(cfg.center_radius == 1.5);
    CHECK(cfg.half_width == 0.2);
    REQUIRE(cfg.dx_list.size() == 2);
    CHECK(cfg.dx_list[0] == 0.1);
    CHECK(cfg.dx_list[1] == 0.05);
    CHECK(cfg.kappa == 2.5);
    CHECK(cfg.kappa_explicit);
    REQUIRE(cfg.snapshots.size() == 3);
    CHECK(cfg.snapshots[2] == 20.0);
    CHECK(cfg.dump_matrices);

    RunConfig defaults;
    CHECK(!defaults.kappa_explicit);
    CHECK(defaults.dx_list.size() == 3);
}

TEST_CASE("config parsing: errors carry file and line") {
    const fs::path bad_key = write_file("bad_key.conf", "surface = sphere\nwidget = 3\n");
    CHECK_THROWS_WITH_AS(parse_config_file(bad_key),
                         doctest::Contains("unknown config key 'widget'"), ConfigError);
    try {
        parse_config_file(bad_key);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad_key.conf:2") != std::string::npos);
    }

    const fs::path no_eq = write_file("no_eq.conf", "surface sphere\n");
    CHECK_THROWS_AS(parse_config_file(no_eq), ConfigError);

    const fs::path bad_num = write_file("bad_num.conf", "kappa = fast\n");
    CHECK_THROWS_AS(parse_config_file(bad_num), ConfigError);

    CHECK_THROWS_AS(parse_config_file(scratch_dir() / "missing.conf"), ConfigError);

    RunConfig cfg;
    CHECK_THROWS_AS(apply_config_entry(cfg, "surface", "cube", "test"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "dump_matrices", "maybe", "test"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(cfg, "dx_list", "", "test"), ConfigError);
}

TEST_CASE("dry run prints the resolved configuration and builds nothing") {
    const fs::path conf = write_file("dry.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.2\n"
                                     "kappa = 1\n");
    const fs::path out = scratch_dir() / "dry_out";
    CHECK(cli({"poisson", "--config", conf.string(), "--out", out.string(), "--dry-run"}) == 0);
    CHECK(!fs::exists(out));
}

TEST_CASE("usage problems exit with code 2") {
    CHECK(cli({}) == 2);                                        // no subcommand
    CHECK(cli({"poisson"}) == 2);                               // missing --config
    CHECK(cli({"warp", "--config", "x"}) == 2);                 // unknown subcommand
    CHECK(cli({"poisson", "--config", "/does/not/exist"}) == 2);

    const fs::path bad = write_file("bad2.conf", "nonsense = 1\n");
    CHECK(cli({"poisson", "--config", bad.string()}) == 2);     // unknown key

    const fs::path multi = write_file("multi_dx.conf", "dx_list = 0.2, 0.1\nkappa = 1\n");
    CHECK(cli({"poisson", "--config", multi.string()}) == 2);   // poisson wants one dx

    const fs::path sphere_conv = write_file("sphere_conv.conf", "surface = sphere\ndx = 0.2\n");
    CHECK(cli({"convergence", "--config", sphere_conv.string()}) == 2);
}

TEST_CASE("runtime failures exit with code 1") {
    // a closed surface has no boundary spectrum: valid config, failing run
    const fs::path conf = write_file("steklov_sphere.conf",
                                     "surface = sphere\n"
                                     "dx = 0.2\n");
    const fs::path out = scratch_dir() / "steklov_sphere_out";
    CHECK(cli({"steklov", "--config", conf.string(), "--out", out.string()}) == 1);
}

TEST_CASE("poisson run: exit 0, artifacts, byte-identical rerun") {
    const fs::path conf = write_file("poisson.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.2\n"
                                     "kappa = 1\n");
    const fs::path out1 = scratch_dir() / "poisson_run1";
    const fs::path out2 = scratch_dir() / "poisson_run2";
    REQUIRE(cli({"poisson", "--config", conf.string(), "--out", out1.string()}) == 0);
    REQUIRE(cli({"poisson", "--config", conf.string(), "--out", out2.string()}) == 0);

    for (const char* name : {"table.csv", "solution.csv"}) {
        const std::string a = slurp(out1 / name);
        const std::string b = slurp(out2 / name);
        REQUIRE(!a.empty());
        CHECK(a == b);
    }

    // 17 significant digits in the table cells
    std::ifstream table(out1 / "table.csv");
    std::string header, row;
    std::getline(table, header);
    std::getline(table, row);
    CHECK(header == "dx,m,error,residual");
    CHECK(row.rfind("0.2", 0) == 0);
    std::stringstream ss(row);
    std::string cell;
    std::getline(ss, cell, ',');       // dx
    std::getline(ss, cell, ',');       // m
    std::getline(ss, cell, ',');       // error
    CHECK(cell.size() >= 17);          // full-precision decimal expansion
}

TEST_CASE("convergence run accepts a single dx and leaves the order blank") {
    const fs::path conf = write_file("single_dx.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.2\n"
                                     "kappa = 1\n");
    const fs::path out = scratch_dir() / "single_dx_out";
    REQUIRE(cli({"convergence", "--config", conf.string(), "--out", out.string()}) == 0);

    std::ifstream table(out / "table.csv");
    std::string header, row;
    std::getline(table, header);
    CHECK(header == "dx,m,error,order");
    REQUIRE(static_cast<bool>(std::getline(table, row)));
    CHECK(row.back() == ',');          // empty order cell
    std::string extra;
    CHECK(!std::getline(table, extra));
}

TEST_CASE("flag overrides beat config values") {
    const fs::path conf = write_file("override.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.3\n"
                                     "kappa = 1\n");
    const fs::path out = scratch_dir() / "override_out";
    REQUIRE(cli({"poisson", "--config", conf.string(), "--out", out.string(), "--dx", "0.2"}) ==
            0);
    std::ifstream table(out / "table.csv");
    std::string header, row;
    std::getline(table, header);
    std::getline(table, row);
    CHECK(row.rfind("0.2", 0) == 0);
    CHECK(row.rfind("0.3", 0) != 0);
}

TEST_CASE("matrix dumps are written on request") {
    const fs::path conf = write_file("dump.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.2\n"
                                     "kappa = 1\n");
    const fs::path out = scratch_dir() / "dump_out";
    REQUIRE(cli({"poisson", "--config", conf.string(), "--out", out.string(),
                 "--dump-matrices"}) == 0);
    for (const char* name : {"E_dx0.2.mtx", "Ebar_dx0.2.mtx", "L_dx0.2.mtx", "D_dx0.2.mtx",
                             "A_dx0.2.mtx"}) {
        CHECK(fs::exists(out / name));
    }
    const std::string head = slurp(out / "E_dx0.2.mtx").substr(0, 14);
    CHECK(head == "%%MatrixMarket");
}

TEST_CASE("grayscott smoke run writes snapshots and summary") {
    const fs::path conf = write_file("gs.conf",
                                     "surface = mobius\n"
                                     "center_radius = 1\n"
                                     "half_width = 0.35\n"
                                     "dx = 0.1\n"
                                     "kappa = 10\n"
                                     "T = 3\n"
                                     "dt = 1\n"
                                     "snapshots = 0, 3\n");
    const fs::path out = scratch_dir() / "gs_out";
    REQUIRE(cli({"grayscott", "--config", conf.string(), "--out", out.string(), "--seed",
                 "42"}) == 0);
    CHECK(fs::exists(out / "snapshot_0.csv"));
    CHECK(fs::exists(out / "snapshot_3.csv"));

    std::ifstream summary(out / "summary.csv");
    std::string line;
    std::getline(summary, line);
    CHECK(line == "time,variance_u,variance_v");
    int rows = 0;
    while (std::getline(summary, line)) ++rows;
    CHECK(rows == 4);  // initial state plus three steps

    std::ifstream snap(out / "snapshot_0.csv");
    std::getline(snap, line);
    CHECK(line == "x,y,z,u,v");

    // rerun with the same seed is byte-identical
    const fs::path out2 = scratch_dir() / "gs_out2";
    REQUIRE(cli({"grayscott", "--config", conf.string(), "--out", out2.string(), "--seed",
                 "42"}) == 0);
    CHECK(slurp(out / "summary.csv") == slurp(out2 / "summary.csv"));
    CHECK(slurp(out / "snapshot_3.csv") == slurp(out2 / "snapshot_3.csv"));

    // a different seed moves the patches
    const fs::path out3 = scratch_dir() / "gs_out3";
    REQUIRE(cli({"grayscott", "--config", conf.string(), "--out", out3.string(), "--seed",
                 "7"}) == 0);
    CHECK(slurp(out / "snapshot_0.csv") != slurp(out3 / "snapshot_0.csv"));
}

TEST_CASE("steklov run writes the spectrum and eigenfunction clouds") {
    const fs::path conf = write_file("steklov.conf",
                                     "surface = hemisphere\n"
                                     "dx = 0.2\n"
                                     "eigenpairs = 3\n");
    const fs::path out = scratch_dir() / "steklov_out";
    REQUIRE(cli({"steklov", "--config", conf.string(), "--out", out.string()}) == 0);

    std::ifstream eigs(out / "eigs.csv");
    std::string line;
    std::getline(eigs, line);
    CHECK(line == "index,sigma,residual");
    int rows = 0;
    while (std::getline(eigs, line)) ++rows;
    CHECK(rows == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(fs::exists(out / ("eigenfunction_" + std::to_string(i) + ".csv")));
    }
}
