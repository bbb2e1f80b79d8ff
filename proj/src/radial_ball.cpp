#include "ovd/radial_ball.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace ovd {

namespace {

struct State {
    double phi;
    double dphi;
};

// RHS of the first-order system away from the axis.
inline State rhs(const NonlinearitySpec& f, int n, double r, const State& y) {
    return {y.dphi, -(n - 1) / r * y.dphi - f.eval_extended(y.phi)};
}

// Series start near the axis:
//   phi(r)  = a - f(a) r^2/(2n) + f(a) f'(a) r^4 / (8 n (n+2)) + O(r^6)
//   phi'(r) =   - f(a) r /n     + f(a) f'(a) r^3 / (2 n (n+2)) + O(r^5)
inline State series_start(const NonlinearitySpec& f, int n, double a, double r) {
    double fa = f.eval_extended(a);
    double fpa = f.eval_deriv_extended(a);
    double r2 = r * r;
    double phi = a - fa * r2 / (2.0 * n) + fa * fpa * r2 * r2 / (8.0 * n * (n + 2.0));
    double dphi = -fa * r / n + fa * fpa * r2 * r / (2.0 * n * (n + 2.0));
    return {phi, dphi};
}

// Integrate from the axis to r = 1, storing nodal values when out != nullptr.
State shoot(const NonlinearitySpec& f, int n, double a, int n_nodes,
            RadialProfile* out = nullptr) {
    const double h = 1.0 / (n_nodes - 1);
    State y = series_start(f, n, a, h);
    if (out) {
        out->values[0] = a;
        out->derivative_values[0] = 0.0;
        out->values[1] = y.phi;
        out->derivative_values[1] = y.dphi;
    }
    for (int i = 1; i < n_nodes - 1; ++i) {
        double r = i * h;
        State k1 = rhs(f, n, r, y);
        State k2 = rhs(f, n, r + 0.5 * h, {y.phi + 0.5 * h * k1.phi, y.dphi + 0.5 * h * k1.dphi});
        State k3 = rhs(f, n, r + 0.5 * h, {y.phi + 0.5 * h * k2.phi, y.dphi + 0.5 * h * k2.dphi});
        State k4 = rhs(f, n, r + h, {y.phi + h * k3.phi, y.dphi + h * k3.dphi});
        y.phi += h / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi);
        y.dphi += h / 6.0 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi);
        if (out && i + 1 < n_nodes) {
            out->values[i + 1] = y.phi;
            out->derivative_values[i + 1] = y.dphi;
        }
    }
    return y;
}

double boundary_value(const NonlinearitySpec& f, int n, double a, int n_nodes) {
    return shoot(f, n, a, n_nodes).phi;
}

}  // namespace

RadialProfile integrate_profile_at_amplitude(const NonlinearitySpec& f, const BallGeometry& geom,
                                             double amplitude, int n_nodes) {
    if (n_nodes < 9) throw DomainError("integrate_profile_at_amplitude: grid too coarse");
    RadialProfile p;
    p.grid = UniformGrid1D(n_nodes, 0.0, 1.0);
    p.values.assign(n_nodes, 0.0);
    p.derivative_values.assign(n_nodes, 0.0);
    State end = shoot(f, geom.n, amplitude, n_nodes, &p);
    p.values[n_nodes - 1] = end.phi;
    p.derivative_values[n_nodes - 1] = end.dphi;
    p.center_value = amplitude;
    p.d_at_1 = end.dphi;
    if (p.d_at_1 != 0.0) p.robin_c = geom.n - 1 + f.eval_extended(0.0) / p.d_at_1;
    return p;
}

std::vector<AmplitudeBracket> find_amplitude_brackets(const NonlinearitySpec& f,
                                                      const BallGeometry& geom,
                                                      const ShootingConfig& cfg) {
    if (!(cfg.a_lo < cfg.a_hi) || cfg.scan_points < 2)
        throw DomainError("find_amplitude_brackets: bad scan configuration");
    const int n = geom.n;
    const int m = cfg.scan_points;
    std::vector<double> a(m), val(m);
    for (int i = 0; i < m; ++i) {
        a[i] = cfg.a_lo + (cfg.a_hi - cfg.a_lo) * i / (m - 1.0);
        val[i] = boundary_value(f, n, a[i], cfg.n_nodes);
    }

    // Flat-map diagnostic: the shooting endpoint does not respond to the
    // amplitude. Measured with Richardson-extrapolated endpoints so the
    // integrator error does not mask a genuinely flat map.
    auto extrapolated = [&](double amp) {
        double c1 = boundary_value(f, n, amp, cfg.n_nodes);
        double c2 = boundary_value(f, n, amp, 2 * cfg.n_nodes - 1);
        return (16.0 * c2 - c1) / 15.0;
    };
    double slope = (extrapolated(cfg.a_hi) - extrapolated(cfg.a_lo)) / (cfg.a_hi - cfg.a_lo);
    if (std::abs(slope) < 1e-10 * std::max(1.0, std::abs(cfg.a_hi)))
        throw ScaleInvariantError(
            "shooting map flat in the amplitude: scale-invariant family "
            "(linear nonlinearity at an eigenvalue); assumption 2 cannot hold");

    std::vector<AmplitudeBracket> brackets;
    for (int i = 0; i + 1 < m; ++i) {
        if (val[i] == 0.0) {
            brackets.push_back({a[i], a[i]});
        } else if ((val[i] < 0) != (val[i + 1] < 0)) {
            brackets.push_back({a[i], a[i + 1]});
        }
    }
    if (brackets.empty())
        throw AssumptionError(
            "assumption 1 unverified: no amplitude in [" + std::to_string(cfg.a_lo) + ", " +
            std::to_string(cfg.a_hi) + "] shoots to zero at r = 1");
    return brackets;
}

RadialProfile solve_ground_profile(const NonlinearitySpec& f, const BallGeometry& geom,
                                   const ShootingConfig& cfg) {
    f.validate_for_dimension(geom.n);
    auto brackets = find_amplitude_brackets(f, geom, cfg);
    if (cfg.bracket_index < 0 || cfg.bracket_index >= static_cast<int>(brackets.size()))
        throw DomainError("solve_ground_profile: bracket_index " +
                          std::to_string(cfg.bracket_index) + " out of range (found " +
                          std::to_string(brackets.size()) + " brackets)");
    const AmplitudeBracket br = brackets[cfg.bracket_index];
    double a_star;
    if (br.a_lo == br.a_hi) {
        a_star = br.a_lo;
    } else {
        a_star = find_root(
            [&](double a) { return boundary_value(f, geom.n, a, cfg.n_nodes); }, br.a_lo,
            br.a_hi, cfg.root_tol);
    }

    RadialProfile p = integrate_profile_at_amplitude(f, geom, a_star, cfg.n_nodes);

    // positivity on the open interval
    for (int i = 1; i < p.grid.n_points - 1; ++i)
        if (!(p.values[i] > 0.0))
            throw PositivityError("solve_ground_profile: solution touches zero at r = " +
                                  std::to_string(p.grid.node(i)));
    if (std::abs(p.values.back()) > 1e-10)
        throw ConvergenceError("solve_ground_profile: boundary value " +
                               std::to_string(p.values.back()) + " not driven to zero");
    p.values.back() = 0.0;  // pin the Dirichlet value after the check
    if (std::abs(p.d_at_1) < 1e-10)
        throw AssumptionError("assumption 1 unverified: boundary flux phi'(1) vanishes");
    p.robin_c = geom.n - 1 + f.eval_extended(0.0) / p.d_at_1;
    return p;
}

double robin_constant(const RadialProfile& profile, const NonlinearitySpec& f,
                      const BallGeometry& geom) {
    if (profile.d_at_1 == 0.0) throw DomainError("robin_constant: zero boundary flux");
    return geom.n - 1 + f.eval_extended(0.0) / profile.d_at_1;
}

std::pair<double, double> eval_profile(const RadialProfile& profile, double r) {
    if (r < 0.0 || r > 1.0) throw DomainError("eval_profile: r outside [0, 1]");
    const int n = profile.grid.n_points;
    const double h = profile.grid.spacing();
    int i = std::min(static_cast<int>(r / h), n - 2);
    double t = (r - i * h) / h;
    if (t < 0) t = 0;
    if (t > 1) t = 1;
    double y0 = profile.values[i], y1 = profile.values[i + 1];
    double d0 = profile.derivative_values[i], d1 = profile.derivative_values[i + 1];
    double t2 = t * t, t3 = t2 * t;
    double value = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
                   (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
    double deriv = (6 * t2 - 6 * t) * y0 / h + (3 * t2 - 4 * t + 1) * d0 +
                   (-6 * t2 + 6 * t) * y1 / h + (3 * t2 - 2 * t) * d1;
    return {value, deriv};
}

double ode_residual(const RadialProfile& profile, const NonlinearitySpec& f,
                    const BallGeometry& geom) {
    const int n = profile.grid.n_points;
    const double h = profile.grid.spacing();
    std::vector<double> second = derivative_fourth_order(profile.derivative_values, h);
    double worst = 0.0;
    for (int i = 1; i < n - 1; ++i) {
        double r = profile.grid.node(i);
        double res = second[i] + (geom.n - 1) / r * profile.derivative_values[i] +
                     f.eval_extended(profile.values[i]);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

void export_profile_csv(const RadialProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.precision(17);
    out << "r,phi,dphi\n";
    for (int i = 0; i < profile.grid.n_points; ++i)
        out << profile.grid.node(i) << ',' << profile.values[i] << ','
            << profile.derivative_values[i] << '\n';
}

}  // namespace ovd
