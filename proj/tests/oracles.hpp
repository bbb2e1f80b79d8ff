// Test-local independent oracles. These deliberately avoid the library's own
// numerics so that expected values come from a second route.
#ifndef OVD_TEST_ORACLES_HPP
#define OVD_TEST_ORACLES_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// plain bisection to an absolute width
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double width = 1e-12) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0)) throw std::runtime_error("oracle::bisect: no sign change");
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Richardson-refined trapezoid (Romberg, fixed depth) -- independent of the
// library's Simpson rule.
inline double romberg(const std::function<double(double)>& f, double a, double b,
                      int depth = 16) {
    std::vector<std::vector<double>> r(depth, std::vector<double>(depth, 0.0));
    double h = b - a;
    r[0][0] = 0.5 * h * (f(a) + f(b));
    for (int i = 1; i < depth; ++i) {
        h *= 0.5;
        double sum = 0;
        for (int k = 1; k <= (1 << (i - 1)); ++k) sum += f(a + (2 * k - 1) * h);
        r[i][0] = 0.5 * r[i - 1][0] + h * sum;
        double pow4 = 1;
        for (int j = 1; j <= i; ++j) {
            pow4 *= 4;
            r[i][j] = r[i][j - 1] + (r[i][j - 1] - r[i - 1][j - 1]) / (pow4 - 1);
        }
    }
    return r[depth - 1][depth - 1];
}

// Independent shooting integrator for the radial ground-state problem:
// classical RK4 on (phi, phi') with its own series start, separate from the
// library implementation (different step layout and no linear extension).
struct ShotResult {
    double phi_end;
    double dphi_end;
};

inline ShotResult shoot_ground(const std::function<double(double)>& f, int dim, double a,
                               int steps) {
    double h = 1.0 / steps;
    double r = h;
    // phi(h), phi'(h) from the quadratic truncation (the quartic term is
    // below RK4 accuracy at these step sizes when halved once more)
    double fa = f(a);
    double fpa = (f(a + 1e-6) - f(a - 1e-6)) / 2e-6;
    double phi = a - fa * h * h / (2.0 * dim) +
                 fa * fpa * h * h * h * h / (8.0 * dim * (dim + 2.0));
    double dphi = -fa * h / dim + fa * fpa * h * h * h / (2.0 * dim * (dim + 2.0));
    auto acc = [&](double rr, double p, double dp) {
        return -(dim - 1) / rr * dp - f(p);
    };
    for (int i = 1; i < steps; ++i) {
        double k1p = dphi, k1d = acc(r, phi, dphi);
        double k2p = dphi + 0.5 * h * k1d, k2d = acc(r + 0.5 * h, phi + 0.5 * h * k1p, k2p);
        double k3p = dphi + 0.5 * h * k2d, k3d = acc(r + 0.5 * h, phi + 0.5 * h * k2p, k3p);
        double k4p = dphi + h * k3d, k4d = acc(r + h, phi + h * k3p, k4p);
        phi += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        dphi += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
        r += h;
    }
    return {phi, dphi};
}

// center value of the ground state by bisection on the oracle shooting map
inline double ground_center(const std::function<double(double)>& f, int dim, double a_lo,
                            double a_hi, int steps) {
    return bisect([&](double a) { return shoot_ground(f, dim, a, steps).phi_end; }, a_lo, a_hi,
                  1e-13);
}

}  // namespace oracle

#endif
