#ifndef OVD_CONTINUATION_HPP
#define OVD_CONTINUATION_HPP

#include <string>
#include <vector>

#include "ovd/cylinder_spectra.hpp"
#include "ovd/dtn.hpp"

namespace ovd {

// One continuation state on the nontrivial branch: the amplitude s (first
// cosine coefficient of v, pinned), the period, the remaining coefficients,
// the 2D solution field and the common boundary flux.
struct BranchPoint {
    double s = 0.0;
    double T_s = 0.0;
    EvenFourierProfile v_s;  // first coefficient equals s exactly
    CylinderField field;
    double flux_constant = 0.0;
    double newton_residual = 0.0;     // max of inner and outer residuals
    double flux_deviation = 0.0;      // sup of the boundary flux minus its mean
    double g_norm = 0.0;              // sup over coefficients 1..K of G
};

struct Branch {
    std::vector<BranchPoint> points;  // s strictly increasing through 0
    double t_star = 0.0;
    int kernel_mode = 1;
    std::string truncation_note;      // nonempty when a half-branch stopped early
};

struct CertifyOptions {
    int k_max = 8;              // modes inspected for the kernel count
    double kernel_tol = 1e-4;   // |sigma_k(T*)| below this counts as kernel
    double cross_tol = 1e-4;    // |T*_root - T*_gamma| bound
    double assumption_tol = 1e-4;
    int spectrum_k = 8;
    SpectrumConfig spectrum_cfg{};
    ModeConfig mode_cfg{};
};

struct CertifyReport {
    bool pass = false;
    std::string message;
    int negative_count = 0;
    double gamma_D1 = 0.0;
    double gamma_1 = 0.0;
    double t_bar_value = 0.0;
    double t_star_gamma = 0.0;  // 2 pi / sqrt(-gamma_1)
    double t_star_root = 0.0;   // root of sigma_1
    double cross_diff = 0.0;
    int kernel_dim = 0;
    int kernel_mode = 0;
    std::vector<double> sigma_at_t_star;  // sigma_k(T*_root), k = 1..k_max
    double transversality = 0.0;
    double transversality_rel_err = 0.0;
};

// Crandall-Rabinowitz hypotheses at the candidate bifurcation point: simple
// kernel at mode 1, nonzero (negative) transversal derivative, and agreement
// of the two independent T* computations.
CertifyReport certify_bifurcation(const RadialProfile& profile, const NonlinearitySpec& f,
                                  const BallGeometry& geom, double c,
                                  const CertifyOptions& opts = {});

struct BranchConfig {
    int K = 8;                   // cosine modes carried by v
    double outer_tol = 1e-11;    // residual target on the G coefficients
    int outer_max_iter = 25;
    double fd_step = 1e-7;       // outer Jacobian differencing step
    double ds_min = 1e-6;        // smallest allowed amplitude step
    bool adapt_modes = true;     // double K when the last coefficient is active
    int n_threads = 1;           // the two half-branches may run in parallel
};

// Continue the branch through the amplitudes in s_grid (the trivial point is
// always included). For each s the square system
//   { G-coefficients 2..K = 0, G-coefficient 1 = 0 }
// is solved for {v_2..v_K, T} with v_1 pinned to s.
Branch extend_branch(const CylinderSolver& solver, double t_star,
                     const std::vector<double>& s_grid, const BranchConfig& cfg = {});

struct BranchPointDiagnostics {
    double s = 0.0;
    double T_s = 0.0;
    double flux_residual = 0.0;
    double min_interior_value = 0.0;
    double mean_zero_residual = 0.0;  // identically zero for the cosine storage
    double evenness_residual = 0.0;   // identically zero for the cosine storage
    double remainder_norm = 0.0;      // || v_s - s cos(2 pi t) ||_2
    double period_offset = 0.0;       // |T_s - T*|
};

struct BranchDiagnostics {
    std::vector<BranchPointDiagnostics> points;
    double remainder_slope = 0.0;     // log-log slope of the remainder vs |s|
    double period_slope_constant = 0.0;  // fitted C with |T_s - T*| <= C |s|
    double symmetry_period_diff = 0.0;   // max |T_s - T_{-s}| over matched pairs
    double symmetry_profile_diff = 0.0;  // max |v_{-s,k} - (-1)^k v_{s,k}|
};

BranchDiagnostics branch_diagnostics(const Branch& branch);

void export_branch_csv(const Branch& branch, const std::string& path);

}  // namespace ovd

#endif
