#ifndef OVD_BALL_SPECTRA_HPP
#define OVD_BALL_SPECTRA_HPP

#include <string>
#include <vector>

#include "ovd/radial_ball.hpp"

namespace ovd {

enum class BoundaryKind { Dirichlet, Robin };
enum class Normalization { UnitL2Ball, UnitBoundaryValue };

// Eigenpairs of the radial linearized operator
//   -(r^{n-1} psi')'/r^{n-1} - f'(phi1) psi = gamma psi   on (0, 1),
// regular at the axis, with a Dirichlet or Robin (psi' + c psi = 0) condition
// at r = 1. Eigenvalues are Richardson-extrapolated over a grid ladder;
// eigenfunctions live on the finest grid.
struct Spectrum {
    BoundaryKind bc = BoundaryKind::Dirichlet;
    double robin_c = 0.0;  // only meaningful for Robin
    std::vector<double> eigenvalues;     // ascending
    std::vector<double> err_estimates;   // per-eigenvalue Richardson estimate
    std::vector<std::vector<double>> eigenfunctions;  // nodal values incl. r = 1
    UniformGrid1D grid;
    Normalization normalization = Normalization::UnitL2Ball;
    int negative_count = 0;  // exact discrete count on the finest grid
};

// Finite-volume rows of the self-adjoint form; shared by the ball spectra and
// the cylinder mode solves. Nodes r_i = i/N, i = 0..N.
struct RadialFv {
    int n_cells = 0;               // N
    double h = 0.0;
    std::vector<double> flux_w;    // w_{i+1/2} = r_{i+1/2}^{n-1}, i = 0..N-1
    std::vector<double> mass;      // cell masses (r_{i+1/2}^n - r_{i-1/2}^n)/n, i = 0..N
};

RadialFv make_radial_fv(int n_cells, int dim);

// f'(phi1) sampled on the N+1 nodes through the profile interpolant.
std::vector<double> sample_potential(const RadialProfile& profile, const NonlinearitySpec& f,
                                     int n_cells);

struct SpectrumConfig {
    int base_nodes = 201;  // ladder base; ladder is {base, 2*base-1, 4*base-3}
};

Spectrum dirichlet_spectrum(const RadialProfile& profile, const NonlinearitySpec& f,
                            const BallGeometry& geom, int k,
                            const SpectrumConfig& cfg = {});

Spectrum robin_spectrum(const RadialProfile& profile, const NonlinearitySpec& f,
                        const BallGeometry& geom, double c, int k,
                        Normalization normalization = Normalization::UnitL2Ball,
                        const SpectrumConfig& cfg = {});

// omega_n * int_0^1 r^{n-1} (psi'^2 - f'(phi1) psi^2) dr  [+ c omega_n psi(1)^2]
// for nodal values psi on a uniform grid over [0, 1].
double quadratic_form_Q(const RadialProfile& profile, const NonlinearitySpec& f,
                        const BallGeometry& geom, double c, const UniformGrid1D& grid,
                        const std::vector<double>& psi, bool include_boundary);

enum class AssumptionStatus { Pass, Fail, Inconclusive };

struct AssumptionReport {
    AssumptionStatus status = AssumptionStatus::Inconclusive;
    int negative_count = 0;    // l
    double min_abs_eigenvalue = 0.0;
    double max_err_estimate = 0.0;
    double tol = 0.0;
    std::string message;
};

// Nondegeneracy of the Dirichlet linearization: every computed |gamma_Dj|
// must clear tol, with the extrapolation error below tol/10.
AssumptionReport check_assumptions(const Spectrum& dirichlet, double tol = 1e-4);

// int_0^1 r^{n-3} phi1'^2 dr for n >= 2 (integrand -> 0 at the axis).
double weighted_tail_integral(const RadialProfile& profile, const BallGeometry& geom);

void export_spectrum_csv(const Spectrum& spectrum, const std::string& eigenvalue_path,
                         const std::string& eigenfunction_prefix);

}  // namespace ovd

#endif
