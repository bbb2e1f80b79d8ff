#ifndef OVD_CYLINDER_SPECTRA_HPP
#define OVD_CYLINDER_SPECTRA_HPP

#include <string>
#include <vector>

#include "ovd/ball_spectra.hpp"

namespace ovd {

// Radial factor of one separated cosine mode on the straight cylinder:
//   rho'' + (n-1)/r rho' + (f'(phi1) - (2 pi k / T)^2) rho = 0,
// regular at the axis, rho(1) = 1. sigma_k = rho'(1) + c is the k-th
// eigenvalue of the flux linearization on even mean-zero perturbations.
struct ModeProfile {
    int k = 0;
    double T = 0.0;
    std::vector<double> values;  // nodes 0..N of the solve grid
    UniformGrid1D grid;
    double flux = 0.0;     // rho'(1), Richardson extrapolated
    double sigma_k = 0.0;  // rho'(1) + c
};

struct SigmaCurve {
    std::vector<double> T_values;
    std::vector<double> sigma_values;
    std::vector<int> minimizing_k;
};

struct ModeConfig {
    int base_cells = 800;  // fluxes extrapolated from base and 2*base cells
};

// Invertibility threshold of the cylinder Dirichlet linearization:
// 2 pi / sqrt(-gamma_D1) when gamma_D1 < 0, +infinity when gamma_D1 > 0.
double t_bar(double gamma_D1);

// Bifurcation period 2 pi / sqrt(-gamma_1); requires gamma_1 < 0.
double t_star(double gamma_1);

ModeProfile mode_solution(const RadialProfile& profile, const NonlinearitySpec& f,
                          const BallGeometry& geom, int k, double T,
                          const ModeConfig& cfg = {});

// sigma(T) = min over 1 <= k <= k_max of sigma_k(T).
SigmaCurve sigma_curve(const RadialProfile& profile, const NonlinearitySpec& f,
                       const BallGeometry& geom, double c, const std::vector<double>& T_range,
                       int k_max, const ModeConfig& cfg = {}, int n_threads = 1);

// Root of T -> sigma_1(T) on (0, t_bar); independent of the Robin eigenvalue
// route and cross-checked against it by the callers.
double find_t_star_by_root(const RadialProfile& profile, const NonlinearitySpec& f,
                           const BallGeometry& geom, double c, double t_bar_value,
                           const ModeConfig& cfg = {});

enum class MinBranch { NextDirichlet, ShiftedFirst };

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
    MinBranch alpha_branch = MinBranch::NextDirichlet;
    MinBranch beta_branch = MinBranch::NextDirichlet;
};

// alpha = min{gamma_{D,l+1}, gamma_D1 + 4 pi^2/T^2},
// beta  = min{gamma_{D,l+1}, gamma_1  + 4 pi^2/T^2}.
AlphaBeta alpha_beta(const Spectrum& dirichlet, double gamma_1, double T);

// Quadratic form of the flux linearization on cosine coefficients:
// J_T(v) = 1/2 sum_k sigma_k(T) v_k^2.
double jt_quadratic(const std::vector<double>& v_coeffs, double T,
                    const std::vector<double>& sigma_ks);

struct TransversalityReport {
    double fd_value = 0.0;         // d/dT of J_T(cos 2 pi t) at T*
    double reference_value = 0.0;  // -(4 pi^2 / T*^3) int r^{n-1} psi1^2
    double rel_err = 0.0;
    double consistency_residual = 0.0;  // (T*/2) gamma1 ||psi1||^2 + (2 pi^2/T*) ||psi1||^2
    double psi1_norm2 = 0.0;            // int_0^1 r^{n-1} psi1^2 dr
};

// Centered difference of J_T(cos 2 pi t) in T at T*, checked against the
// closed-form value built from the boundary-normalized Robin eigenfunction
// (psi1(1) = 1). Throws if the value is within tol of zero.
TransversalityReport transversality(const RadialProfile& profile, const NonlinearitySpec& f,
                                    const BallGeometry& geom, double c, double T_star,
                                    const std::vector<double>& psi1, const UniformGrid1D& psi_grid,
                                    double gamma_1, const ModeConfig& cfg = {});

// Q^T(psi_v) for v = sum v_k cos(2 pi k t), psi_v assembled from the separated
// modes, by tensor quadrature (Simpson radially, exact trapezoid in t).
double qt_separable(const RadialProfile& profile, const NonlinearitySpec& f,
                    const BallGeometry& geom, double c, const std::vector<double>& v_coeffs,
                    double T, const ModeConfig& cfg = {});

void export_sigma_csv(const SigmaCurve& curve, const std::string& path);

}  // namespace ovd

#endif
