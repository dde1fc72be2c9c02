#include "cpband/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpband/io.hpp"
#include "cpband/reference_problems.hpp"

namespace cpband {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + v + "' (" + where + ")");
    }
}

long parse_long(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (const std::exception&) {
        throw ConfigError("bad integer '" + v + "' (" + where + ")");
    }
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean '" + v + "' (" + where + ")");
}

std::vector<double> parse_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, where));
    }
    if (out.empty()) throw ConfigError("empty list (" + where + ")");
    return out;
}

Exec pick_exec(const RunConfig& cfg) {
    if (cfg.exec == "serial") return Exec::Serial;
    if (cfg.exec == "parallel") return Exec::Parallel;
    throw ConfigError("exec must be serial or parallel, got '" + cfg.exec + "'");
}

SolveMethod pick_method(const RunConfig& cfg) {
    if (cfg.solver == "auto") return SolveMethod::Auto;
    if (cfg.solver == "direct") return SolveMethod::Direct;
    if (cfg.solver == "iterative") return SolveMethod::Iterative;
    throw ConfigError("solver must be auto, direct or iterative, got '" + cfg.solver + "'");
}

void require_unit_hemisphere(const RunConfig& cfg) {
    if (cfg.surface != "hemisphere" || cfg.radius != 1.0) {
        throw ConfigError("the manufactured problem is defined on the unit hemisphere");
    }
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
    return std::filesystem::path(cfg.out) / name;
}

// Short form for file tags; full precision would turn 0.2 into
// 0.20000000000000001.
std::string format_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void dump_operators(const RunConfig& cfg, const std::string& tag, const TubeOperators& ops,
                    const SparseMat* A) {
    write_matrix_market(out_path(cfg, "E_" + tag + ".mtx"), ops.E);
    write_matrix_market(out_path(cfg, "Ebar_" + tag + ".mtx"), ops.Ebar);
    write_matrix_market(out_path(cfg, "L_" + tag + ".mtx"), ops.L.matrix);
    write_matrix_market_diagonal(out_path(cfg, "D_" + tag + ".mtx"), ops.D);
    if (A) write_matrix_market(out_path(cfg, "A_" + tag + ".mtx"), *A);
}

// Near-surface slice of per-point columns, for external viewers.
void write_point_cloud(const std::filesystem::path& path, const BandGrid& grid,
                       const std::vector<std::string>& names,
                       const std::vector<const Eigen::VectorXd*>& columns) {
    std::vector<std::string> header = {"x", "y", "z"};
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<double>> rows;
    for (Index i = 0; i < grid.size(); ++i) {
        if (grid.distance(i) > grid.dx()) continue;
        const Vec3 p = grid.position(i);
        std::vector<double> row = {p.x(), p.y(), p.z()};
        for (const auto* col : columns) row.push_back((*col)[i]);
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

EllipticProblem manufactured_problem(const RunConfig& cfg) {
    EllipticProblem prob;
    prob.c = cfg.c;
    prob.f = problems::hemisphere_rhs;
    const double kappa = cfg.kappa;
    prob.bc = BoundaryCondition::robin(
        kappa, [kappa](const Vec3& y) { return problems::hemisphere_robin_g(y, kappa); });
    return prob;
}

} // namespace

// --- configuration ----------------------------------------------------------

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where) {
    if (key == "surface") {
        if (value != "hemisphere" && value != "sphere" && value != "mobius") {
            throw ConfigError("unknown surface '" + value + "' (" + where + ")");
        }
        cfg.surface = value;
    } else if (key == "radius") {
        cfg.radius = parse_double(value, where);
    } else if (key == "center_radius") {
        cfg.center_radius = parse_double(value, where);
    } else if (key == "half_width") {
        cfg.half_width = parse_double(value, where);
    } else if (key == "dx") {
        cfg.dx_list = {parse_double(value, where)};
    } else if (key == "dx_list") {
        cfg.dx_list = parse_list(value, where);
    } else if (key == "kappa") {
        cfg.kappa = parse_double(value, where);
        cfg.kappa_explicit = true;
    } else if (key == "c") {
        cfg.c = parse_double(value, where);
    } else if (key == "seed") {
        cfg.seed = static_cast<unsigned>(parse_long(value, where));
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "solver") {
        cfg.solver = value;
    } else if (key == "exec") {
        cfg.exec = value;
    } else if (key == "F") {
        cfg.gs.F = parse_double(value, where);
    } else if (key == "k") {
        cfg.gs.k = parse_double(value, where);
    } else if (key == "Du") {
        cfg.gs.Du = parse_double(value, where);
    } else if (key == "Dv") {
        cfg.gs.Dv = parse_double(value, where);
    } else if (key == "T") {
        cfg.gs.T = parse_double(value, where);
    } else if (key == "dt") {
        cfg.gs.dt = parse_double(value, where);
    } else if (key == "patches") {
        cfg.perturbation.patches = static_cast<int>(parse_long(value, where));
    } else if (key == "patch_radius") {
        cfg.perturbation.radius = parse_double(value, where);
    } else if (key == "patch_u") {
        cfg.perturbation.u_inside = parse_double(value, where);
    } else if (key == "patch_v") {
        cfg.perturbation.v_inside = parse_double(value, where);
    } else if (key == "snapshots") {
        cfg.snapshots = parse_list(value, where);
    } else if (key == "eigenpairs") {
        cfg.eigenpairs = static_cast<int>(parse_long(value, where));
    } else if (key == "shift") {
        cfg.shift = parse_double(value, where);
    } else if (key == "dump_matrices") {
        cfg.dump_matrices = parse_bool(value, where);
    } else {
        throw ConfigError("unknown config key '" + key + "' (" + where + ")");
    }
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value at " + path.filename().string() + ":" +
                              std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("empty key at " + path.filename().string() + ":" +
                              std::to_string(lineno));
        }
        apply_config_entry(cfg, key, value,
                           path.filename().string() + ":" + std::to_string(lineno));
    }
    return cfg;
}

Surface make_surface(const RunConfig& cfg) {
    try {
        if (cfg.surface == "hemisphere") return Surface::upper_hemisphere(cfg.radius);
        if (cfg.surface == "sphere") return Surface::sphere(cfg.radius);
        if (cfg.surface == "mobius") return Surface::mobius_strip(cfg.center_radius, cfg.half_width);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown surface '" + cfg.surface + "'");
}

// --- commands -------------------------------------------------------------------

int cmd_convergence(const RunConfig& cfg) {
    require_unit_hemisphere(cfg);
    if (cfg.dx_list.empty()) throw ConfigError("convergence needs at least one dx value");
    const Surface surface = make_surface(cfg);
    const Exec mode = pick_exec(cfg);
    const SolveMethod method = pick_method(cfg);
    const EllipticProblem prob = manufactured_problem(cfg);

    std::printf("%10s %12s %22s %10s\n", "dx", "m", "error", "order");
    std::vector<std::vector<std::string>> rows;
    std::vector<double> errors;
    for (std::size_t i = 0; i < cfg.dx_list.size(); ++i) {
        const double dx = cfg.dx_list[i];
        const BandGrid grid = build_band(surface, dx, 3, 2, mode);
        const TubeOperators ops = build_tube_operators(grid, mode);
        const auto [A, b] = assemble_robin(ops, grid, prob);
        if (cfg.dump_matrices) dump_operators(cfg, "dx" + format_tag(dx), ops, &A);
        const SolveReport rep = solve_linear(A, b, method);
        const double err = surface_error(rep.solution, problems::hemisphere_exact, ops, grid);
        errors.push_back(err);

        std::string order;
        if (i > 0) {
            order = format_g17(std::log(errors[i - 1] / err) /
                               std::log(cfg.dx_list[i - 1] / dx));
        }
        std::printf("%10s %12lld %22s %10s\n", format_g17(dx).c_str(),
                    static_cast<long long>(grid.size()), format_g17(err).c_str(),
                    order.empty() ? "-" : order.c_str());
        std::fflush(stdout);
        rows.push_back({format_g17(dx), format_g17(static_cast<double>(grid.size())),
                        format_g17(err), order});
    }
    write_csv_rows(out_path(cfg, "table.csv"), {"dx", "m", "error", "order"}, rows);
    return 0;
}

int cmd_poisson(const RunConfig& cfg) {
    require_unit_hemisphere(cfg);
    if (cfg.dx_list.size() != 1) throw ConfigError("poisson runs a single dx");
    const double dx = cfg.dx_list[0];
    const Surface surface = make_surface(cfg);
    const Exec mode = pick_exec(cfg);
    const BandGrid grid = build_band(surface, dx, 3, 2, mode);
    const TubeOperators ops = build_tube_operators(grid, mode);
    const auto [A, b] = assemble_robin(ops, grid, manufactured_problem(cfg));
    if (cfg.dump_matrices) dump_operators(cfg, "dx" + format_tag(dx), ops, &A);
    const SolveReport rep = solve_linear(A, b, pick_method(cfg));
    const double err = surface_error(rep.solution, problems::hemisphere_exact, ops, grid);

    std::printf("dx = %s  m = %lld  error = %s  residual = %s\n", format_g17(dx).c_str(),
                static_cast<long long>(grid.size()), format_g17(err).c_str(),
                format_g17(rep.residual_norm).c_str());
    write_csv(out_path(cfg, "table.csv"), {"dx", "m", "error", "residual"},
              {{dx, static_cast<double>(grid.size()), err, rep.residual_norm}});
    write_point_cloud(out_path(cfg, "solution.csv"), grid, {"u"}, {&rep.solution});
    return 0;
}

int cmd_steklov(const RunConfig& cfg) {
    if (cfg.dx_list.size() != 1) throw ConfigError("steklov runs a single dx");
    const double dx = cfg.dx_list[0];
    const Surface surface = make_surface(cfg);
    const Exec mode = pick_exec(cfg);
    const BandGrid grid = build_band(surface, dx, 3, 2, mode);
    const TubeOperators ops = build_tube_operators(grid, mode);
    if (cfg.dump_matrices) dump_operators(cfg, "dx" + format_tag(dx), ops, nullptr);
    const EigenReport rep = solve_steklov(ops, cfg.eigenpairs, cfg.shift, cfg.seed);

    std::printf("m = %lld\n%6s %22s %14s\n", static_cast<long long>(grid.size()), "index",
                "sigma", "residual");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        std::printf("%6zu %22s %14s\n", i, format_g17(rep.eigenvalues[i]).c_str(),
                    format_g17(rep.residuals[i]).c_str());
        rows.push_back({static_cast<double>(i), rep.eigenvalues[i], rep.residuals[i]});
        write_point_cloud(out_path(cfg, "eigenfunction_" + std::to_string(i) + ".csv"), grid,
                          {"phi"}, {&rep.eigenvectors[i]});
    }
    write_csv(out_path(cfg, "eigs.csv"), {"index", "sigma", "residual"}, rows);
    return 0;
}

int cmd_grayscott(const RunConfig& cfg) {
    if (cfg.dx_list.size() != 1) throw ConfigError("grayscott runs a single dx");
    const double dx = cfg.dx_list[0];
    const Surface surface = make_surface(cfg);
    const Exec mode = pick_exec(cfg);
    const BandGrid grid = build_band(surface, dx, 3, 2, mode);
    const TubeOperators ops = build_tube_operators(grid, mode);

    GrayScottParams params = cfg.gs;
    params.kappa = cfg.kappa_explicit ? cfg.kappa : cfg.gs.kappa;

    std::vector<double> times = cfg.snapshots;
    if (times.empty()) {
        times = {0.0, 0.25 * params.T, 0.5 * params.T, 0.75 * params.T, params.T};
    }
    if (cfg.dump_matrices) dump_operators(cfg, "dx" + format_tag(dx), ops, nullptr);

    const RunResult result = run(params, grid, ops, times, cfg.seed, cfg.perturbation);

    for (const SimulationState& s : result.snapshots) {
        write_point_cloud(out_path(cfg, "snapshot_" + format_g17(s.time) + ".csv"), grid,
                          {"u", "v"}, {&s.u, &s.v});
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(result.summary.size());
    for (const SummaryRow& r : result.summary) {
        rows.push_back({r.time, r.variance_u, r.variance_v});
    }
    write_csv(out_path(cfg, "summary.csv"), {"time", "variance_u", "variance_v"}, rows);
    const SummaryRow& last = result.summary.back();
    std::printf("m = %lld  final t = %s  var(u) = %s  var(v) = %s\n",
                static_cast<long long>(grid.size()), format_g17(last.time).c_str(),
                format_g17(last.variance_u).c_str(), format_g17(last.variance_v).c_str());
    return 0;
}

// --- entry point -----------------------------------------------------------------

namespace {

void print_resolved(const RunConfig& cfg) {
    std::printf("experiment = %s\n", cfg.experiment.c_str());
    std::printf("surface = %s\n", cfg.surface.c_str());
    std::printf("radius = %s\n", format_g17(cfg.radius).c_str());
    std::printf("center_radius = %s\n", format_g17(cfg.center_radius).c_str());
    std::printf("half_width = %s\n", format_g17(cfg.half_width).c_str());
    std::string dxs;
    for (double d : cfg.dx_list) dxs += (dxs.empty() ? "" : ",") + format_g17(d);
    std::printf("dx_list = %s\n", dxs.c_str());
    std::printf("kappa = %s\n", format_g17(cfg.kappa).c_str());
    std::printf("c = %s\n", format_g17(cfg.c).c_str());
    std::printf("seed = %u\n", cfg.seed);
    std::printf("out = %s\n", cfg.out.c_str());
    std::printf("solver = %s\n", cfg.solver.c_str());
    std::printf("exec = %s\n", cfg.exec.c_str());
    std::printf("F = %s\n", format_g17(cfg.gs.F).c_str());
    std::printf("k = %s\n", format_g17(cfg.gs.k).c_str());
    std::printf("Du = %s\n", format_g17(cfg.gs.Du).c_str());
    std::printf("Dv = %s\n", format_g17(cfg.gs.Dv).c_str());
    std::printf("T = %s\n", format_g17(cfg.gs.T).c_str());
    std::printf("dt = %s\n", format_g17(cfg.gs.dt).c_str());
    std::printf("patches = %d\n", cfg.perturbation.patches);
    std::printf("patch_radius = %s\n", format_g17(cfg.perturbation.radius).c_str());
    std::string snaps;
    for (double t : cfg.snapshots) snaps += (snaps.empty() ? "" : ",") + format_g17(t);
    std::printf("snapshots = %s\n", snaps.c_str());
    std::printf("eigenpairs = %d\n", cfg.eigenpairs);
    std::printf("shift = %s\n", format_g17(cfg.shift).c_str());
    std::printf("dump_matrices = %s\n", cfg.dump_matrices ? "true" : "false");
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"narrow-band closest point solver for surface PDEs"};
    app.require_subcommand(1);

    std::string config;
    double dx_override = 0.0;
    double kappa_override = 0.0;
    std::string out_override;
    unsigned seed_override = 0;
    bool dump_flag = false;
    bool dry_flag = false;

    const char* names[] = {"convergence", "steklov", "grayscott", "poisson"};
    const char* descs[] = {"refinement study of the manufactured Robin problem",
                           "boundary eigenvalue computation",
                           "two-species pattern formation run",
                           "single manufactured Robin solve"};
    for (int i = 0; i < 4; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config, "key = value configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--dx", dx_override, "grid spacing override (single value)");
        sub->add_option("--kappa", kappa_override, "boundary coefficient override");
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--seed", seed_override, "random seed override");
        sub->add_flag("--dump-matrices", dump_flag, "write operators in Matrix Market format");
        sub->add_flag("--dry-run", dry_flag, "print the resolved configuration and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems exit 2; --help exits 0
    }
    CLI::App* sub = app.get_subcommands().front();

    try {
        RunConfig cfg = parse_config_file(config);
        cfg.experiment = sub->get_name();
        if (sub->count("--dx")) cfg.dx_list = {dx_override};
        if (sub->count("--kappa")) {
            cfg.kappa = kappa_override;
            cfg.kappa_explicit = true;
        }
        if (sub->count("--out")) cfg.out = out_override;
        if (sub->count("--seed")) cfg.seed = seed_override;
        if (dump_flag) cfg.dump_matrices = true;
        if (dry_flag) cfg.dry_run = true;

        if (cfg.dry_run) {
            print_resolved(cfg);
            return 0;
        }
        if (cfg.experiment == "convergence") return cmd_convergence(cfg);
        if (cfg.experiment == "steklov") return cmd_steklov(cfg);
        if (cfg.experiment == "grayscott") return cmd_grayscott(cfg);
        if (cfg.experiment == "poisson") return cmd_poisson(cfg);
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace cpband
