#ifndef OVD_DTN_HPP
#define OVD_DTN_HPP

#include <optional>
#include <string>
#include <vector>

#include "ovd/ball_spectra.hpp"
#include "ovd/radial_ball.hpp"

namespace ovd {

// Even, 1-periodic, mean-zero boundary perturbation stored as cosine
// coefficients: v(t) = sum_{k=1..K} v_k cos(2 pi k t). No constant term is
// stored, so the zero-mean constraint holds identically.
struct EvenFourierProfile {
    std::vector<double> coefficients;  // v_1 .. v_K

    int order() const { return static_cast<int>(coefficients.size()); }
    double eval(double t) const;
    double deriv(double t) const;
    double second_deriv(double t) const;
    double sup_bound() const;  // sum |v_k| >= ||v||_inf
    bool is_zero() const;
};

// Solution of the pulled-back Dirichlet problem on the fixed cylinder.
// values[i][m] = phi_hat(rho_i, s_m) with rho_i = i/N (i = 0..N, i = N is the
// boundary row) and s_m = m/(2M) (half period; the field is even in s).
struct CylinderField {
    int n_cells = 0;  // N
    int modes = 0;    // M
    double T = 0.0;
    EvenFourierProfile v;
    std::vector<std::vector<double>> values;
    double newton_residual = 0.0;
};

struct DtNResult {
    EvenFourierProfile g;  // cosine coefficients 1..M of the flux deviation
    double mean_flux = 0.0;
    double residual = 0.0;           // interior Newton residual of the solve
    double max_abs_deviation = 0.0;  // sup_m |flux(s_m) - mean_flux|
};

struct FdLinearizationReport {
    std::vector<double> eps;
    std::vector<double> r;        // || G(eps w)/eps + phi1'(1) H_T(w) ||_inf
    std::vector<double> r_over_eps;
    double empirical_order = 0.0;  // least-squares slope of log r vs log eps
};

struct OrthogonalityReport {
    std::vector<double> volume_integrals;  // int psi_v z_j over the cylinder, j = 1..l
    double flux_integral = 0.0;            // int over the boundary of d_nu psi_v
    double max_abs = 0.0;
};

struct CylinderSolverConfig {
    int radial_cells = 512;    // N (keeps the max-norm residual floor below newton_tol)
    int modes = 16;            // M (collocation points M+1 on the half period)
    double newton_tol = 1e-10; // residual target per unit solution amplitude
    int newton_max_iter = 50;
};

// Nonlinear Dirichlet solver on the perturbed periodic cylinder, pulled back
// to the fixed one by rho = r/(1+v(t)), plus the flux (Dirichlet-to-Neumann)
// machinery built on it. Spectral cosine collocation in t, second-order
// finite differences in rho, damped Newton with an exact Jacobian.
class CylinderSolver {
  public:
    CylinderSolver(const RadialProfile& profile, const NonlinearitySpec& f,
                   const BallGeometry& geom, CylinderSolverConfig cfg = {});

    const CylinderSolverConfig& config() const { return cfg_; }
    double robin_c() const { return c_; }
    double boundary_flux0() const { return d_at_1_; }  // phi1'(1)

    // Newton solve of the pulled-back problem; initial guess is the ground
    // profile on every slice (or `warm` when given). At v = 0 the result is
    // the ground profile exactly.
    CylinderField solve(const EvenFourierProfile& v, double T,
                        const CylinderField* warm = nullptr) const;

    // Boundary-flux deviation of a converged field: signed normal derivative
    // along the moving boundary minus its surface-measure-weighted mean,
    // expanded in cosine coefficients.
    DtNResult g_operator(const CylinderField& field) const;

    // Flux linearization on the straight cylinder: solve the linear Dirichlet
    // problem with boundary data w, differentiate at the boundary, add c w.
    // No mode separation is used. Optionally returns the 2D linear field.
    EvenFourierProfile ht_apply_2d(const EvenFourierProfile& w, double T,
                                   std::vector<std::vector<double>>* field_out = nullptr) const;

    // r(eps) = || G(eps w, T)/eps + phi1'(1) H_T(w) ||; passes when r = O(eps).
    FdLinearizationReport fd_linearization_check(const EvenFourierProfile& w, double T,
                                                 const std::vector<double>& eps_list) const;

    // Volume orthogonality against the negative Dirichlet eigenfunctions and
    // the zero-mean property of the linear flux (both discrete integrals).
    OrthogonalityReport orthogonality_check(const EvenFourierProfile& v, double T,
                                            const Spectrum& dirichlet) const;

    // Pulled-back elliptic operator (no reaction term) applied to nodal
    // values given on the full (N+1) x (M+1) grid; rows 0..N-1 returned.
    // Used to validate the chain-rule coefficients against analytic fields.
    std::vector<std::vector<double>> apply_linear_part(
        const std::vector<std::vector<double>>& values_with_boundary,
        const EvenFourierProfile& v, double T) const;

    // Q^T(psi_v) by tensor quadrature on the 2D linear field of ht_apply_2d.
    double qt_from_2d_field(const EvenFourierProfile& v, double T) const;

    double s_node(int m) const { return static_cast<double>(m) / (2 * cfg_.modes); }
    double rho_node(int i) const { return static_cast<double>(i) / cfg_.radial_cells; }

  private:
    struct Coeffs;  // per-solve pullback coefficient tables

    Coeffs make_coeffs(const EvenFourierProfile& v, double T) const;
    std::vector<std::vector<double>> residual(const std::vector<std::vector<double>>& x,
                                              const Coeffs& co) const;
    double max_abs(const std::vector<std::vector<double>>& r) const;
    std::vector<double> to_cosine_coefficients(const std::vector<double>& nodal) const;

    const RadialProfile* profile_;
    const NonlinearitySpec* f_;
    BallGeometry geom_;
    CylinderSolverConfig cfg_;
    double c_ = 0.0;
    double d_at_1_ = 0.0;
    std::vector<double> phi1_;     // ground profile on the rho nodes
    double amplitude_scale_ = 0.0; // max |phi1|; scales the residual target
    std::vector<double> defect_;   // straight-operator defect of phi1_ (rows 0..N-1)
    std::vector<double> q_;        // f'(phi1) on the rho nodes
    // collocation matrices, size (M+1)^2, row-major value-space operators
    std::vector<double> d1_;       // d/ds (even -> odd values)
    std::vector<double> d2_;       // d^2/ds^2 (even -> even)
    std::vector<double> cosmat_;   // coefficients -> values
    LuFactor cos_lu_;              // values -> coefficients
};

// Mode multipliers of the 2D flux linearization, Richardson-extrapolated over
// cfg.radial_cells and its doubled companion. This is the quantity reconciled
// against the separated-mode route.
std::vector<double> ht_sigma_2d(const RadialProfile& profile, const NonlinearitySpec& f,
                                const BallGeometry& geom, double T, int k_max,
                                CylinderSolverConfig cfg = {});

void export_field_csv(const CylinderField& field, const std::string& path);
void export_dtn_json(const DtNResult& result, const std::string& path);

}  // namespace ovd

#endif
