#ifndef OVD_CONFIG_HPP
#define OVD_CONFIG_HPP

#include <string>

#include "ovd/nonlinearity.hpp"

namespace ovd {

struct ConfigError : Error {
    using Error::Error;
};

// Flat key-value run configuration with [section] headers; every field has a
// working default, so an empty document is a valid configuration.
struct RunConfig {
    // [problem]
    std::string nonlinearity = "constant";
    double param = 1.0;
    std::string table_f;   // tabulated kind: CSV (u, f)
    std::string table_fp;  // tabulated kind: CSV (u, f')
    int dimension = 1;

    // [shooting]
    double a_lo = 1e-3;
    double a_hi = 10.0;
    int scan_points = 200;
    int bracket_index = 0;

    // [grids]
    int radial_nodes = 2049;      // ground-profile integration
    int spectra_nodes = 201;      // spectral ladder base (then 2x-1, 4x-3)
    int mode_cells = 800;         // cylinder mode solves (then doubled)
    int field_radial_cells = 512;
    int t_modes = 16;

    // [tolerances]
    double assumption_tol = 1e-4;
    double newton_tol = 1e-10;

    // [sigma]
    double T_min = 0.0;  // 0/0 selects an automatic range straddling T*
    double T_max = 0.0;
    int T_samples = 40;
    int k_max = 8;

    // [branch]
    double s_max = 0.05;
    int s_steps = 5;       // amplitudes per half-branch
    int branch_modes = 8;  // K
    bool dump_fields = false;

    // [output]
    std::string out_dir = "out";
    int threads = 1;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
void validate_config(const RunConfig& cfg);

NonlinearitySpec build_nonlinearity(const RunConfig& cfg);

}  // namespace ovd

#endif
