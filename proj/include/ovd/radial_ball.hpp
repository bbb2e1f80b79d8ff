#ifndef OVD_RADIAL_BALL_HPP
#define OVD_RADIAL_BALL_HPP

#include <utility>
#include <vector>

#include "ovd/nonlinearity.hpp"
#include "ovd/numerics.hpp"

namespace ovd {

// Radial Dirichlet ground state in the unit ball: the positive solution of
//   phi'' + (n-1)/r phi' + f(phi) = 0,  phi(1) = 0, phi'(0) = 0,
// with nonzero boundary flux, found by shooting on the center value.
struct RadialProfile {
    UniformGrid1D grid;                    // [0, 1]
    std::vector<double> values;            // phi at nodes
    std::vector<double> derivative_values; // phi' at nodes
    double d_at_1 = 0.0;                   // phi'(1)
    double center_value = 0.0;             // phi(0)
    double robin_c = 0.0;                  // n - 1 + f(0)/phi'(1)
};

struct ShootingConfig {
    double a_lo = 1e-3;   // amplitude search interval for a = phi(0)
    double a_hi = 10.0;
    int scan_points = 200;
    int n_nodes = 2049;      // radial grid nodes (including r = 0 and r = 1)
    int bracket_index = 0;   // which sign-change bracket to solve when several exist
    double root_tol = 1e-12; // amplitude bracket width
};

struct AmplitudeBracket {
    double a_lo = 0.0;
    double a_hi = 0.0;
};

// Integrate the radial IVP at a fixed center value; classical fourth-order
// steps on [h, 1] with a series bridge across the axis. No boundary or
// positivity conditions are imposed here.
RadialProfile integrate_profile_at_amplitude(const NonlinearitySpec& f, const BallGeometry& geom,
                                             double amplitude, int n_nodes);

// All sign-change brackets of a -> phi(1; a) on the scan lattice.
// Throws ScaleInvariantError when the shooting map is flat in a (the linear
// degeneracy) and AssumptionError when no bracket exists.
std::vector<AmplitudeBracket> find_amplitude_brackets(const NonlinearitySpec& f,
                                                      const BallGeometry& geom,
                                                      const ShootingConfig& cfg);

// Full solve: bracket scan, root-find on the selected bracket, positivity and
// flux checks. cfg.bracket_index selects among multiple ground states.
RadialProfile solve_ground_profile(const NonlinearitySpec& f, const BallGeometry& geom,
                                   const ShootingConfig& cfg);

// n - 1 + f(0)/phi'(1); equals -phi''(1)/phi'(1) up to O(h^2).
double robin_constant(const RadialProfile& profile, const NonlinearitySpec& f,
                      const BallGeometry& geom);

// Cubic Hermite interpolation from the stored (value, derivative) pairs;
// exact at nodes. Returns {phi(r), phi'(r)}.
std::pair<double, double> eval_profile(const RadialProfile& profile, double r);

// Max norm of phi'' + (n-1)/r phi' + f(phi) over interior nodes, phi''
// obtained by fourth-order differencing of the stored derivative.
double ode_residual(const RadialProfile& profile, const NonlinearitySpec& f,
                    const BallGeometry& geom);

// CSV with columns r, phi, dphi.
void export_profile_csv(const RadialProfile& profile, const std::string& path);

}  // namespace ovd

#endif
