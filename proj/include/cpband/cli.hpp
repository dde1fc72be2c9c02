#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpband/reaction_diffusion.hpp"

namespace cpband {

// Resolved settings for one experiment run. Populated from a plain-text
// `key = value` config file (# comments, unknown keys rejected), then
// overridden by command-line flags.
struct RunConfig {
    std::string experiment;  // convergence | steklov | grayscott | poisson

    std::string surface = "hemisphere";  // hemisphere | sphere | mobius
    double radius = 1.0;
    double center_radius = 1.0;
    double half_width = 0.35;

    std::vector<double> dx_list = {0.1, 0.05, 0.025};
    double kappa = 1.0;
    bool kappa_explicit = false;  // grayscott falls back to 0 when unset
    double c = 0.0;
    unsigned seed = 42;
    std::string out = "out";
    std::string solver = "auto";  // auto | direct | iterative
    std::string exec = "serial";  // serial | parallel

    GrayScottParams gs;
    Perturbation perturbation;
    std::vector<double> snapshots;  // times; empty = quartiles of [0, T]

    int eigenpairs = 7;
    double shift = -0.1;

    bool dump_matrices = false;
    bool dry_run = false;
};

RunConfig parse_config_file(const std::filesystem::path& path);

// Applies one key/value pair; throws ConfigError for unknown keys or
// malformed values. `where` labels the source in error messages.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where);

Surface make_surface(const RunConfig& cfg);

int cmd_convergence(const RunConfig& cfg);
int cmd_steklov(const RunConfig& cfg);
int cmd_grayscott(const RunConfig& cfg);
int cmd_poisson(const RunConfig& cfg);

// Full command-line entry point; returns the process exit code
// (0 success, 1 runtime failure, 2 configuration/usage error).
int run_cli(int argc, const char* const* argv);

} // namespace cpband
