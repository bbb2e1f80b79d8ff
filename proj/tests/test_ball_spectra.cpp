#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "ovd/ball_spectra.hpp"

using namespace ovd;

namespace {

RadialProfile constant_profile(int n, int nodes = 801) {
    auto f = NonlinearitySpec::constant(1.0);
    auto geom = BallGeometry::make(n);
    ShootingConfig cfg;
    cfg.n_nodes = nodes;
    return solve_ground_profile(f, geom, cfg);
}

RadialProfile cubic_disk_profile(int nodes = 801) {
    auto f = NonlinearitySpec::power_minus_linear(3.0);
    auto geom = BallGeometry::make(2);
    ShootingConfig cfg;
    cfg.n_nodes = nodes;
    cfg.a_lo = 1.05;
    cfg.a_hi = 8.0;
    return solve_ground_profile(f, geom, cfg);
}

}  // namespace

TEST_CASE("dirichlet spectrum: f == 1 reduces to the Laplacian eigenvalues") {
    auto f = NonlinearitySpec::constant(1.0);
    // n = 1: even eigenfunctions cos((2m+1) pi r / 2)
    {
        auto geom = BallGeometry::make(1);
        RadialProfile p = constant_profile(1);
        Spectrum s = dirichlet_spectrum(p, f, geom, 3);
        for (int m = 0; m < 3; ++m) {
            double mu = (2 * m + 1) * M_PI / 2.0;
            CHECK(std::abs(s.eigenvalues[m] - mu * mu) <= 1e-6);
        }
        CHECK(s.negative_count == 0);
        // normalization: omega_1 * int psi^2 = 1
        std::vector<double> ps2(s.grid.n_points), ones(s.grid.n_points, 1.0);
        for (int i = 0; i < s.grid.n_points; ++i)
            ps2[i] = s.eigenfunctions[0][i] * s.eigenfunctions[0][i];
        CHECK(geom.omega_n * integrate_weighted(ps2, ones, s.grid) ==
              doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(s.eigenfunctions[0].back()) <= 1e-10);
    }
    // n = 3: radial eigenfunction sin(pi r)/r, eigenvalue pi^2
    {
        auto geom = BallGeometry::make(3);
        RadialProfile p = constant_profile(3);
        Spectrum s = dirichlet_spectrum(p, f, geom, 2);
        CHECK(std::abs(s.eigenvalues[0] - M_PI * M_PI) <= 1e-5);
        CHECK(std::abs(s.eigenvalues[1] - 4 * M_PI * M_PI) <= 1e-4);
    }
}

TEST_CASE("robin spectrum: hyperbolic ground modes for f == 1, c = -1") {
    auto f = NonlinearitySpec::constant(1.0);
    {
        auto geom = BallGeometry::make(1);
        RadialProfile p = constant_profile(1);
        double mu = oracle::bisect([](double m) { return m * std::tanh(m) - 1.0; }, 0.5, 2.0);
        Spectrum s = robin_spectrum(p, f, geom, -1.0, 2);
        CHECK(std::abs(s.eigenvalues[0] - (-mu * mu)) <= 1e-6);
        CHECK(s.eigenvalues[0] == doctest::Approx(-1.439229).epsilon(1e-5));
    }
    {
        auto geom = BallGeometry::make(3);
        RadialProfile p = constant_profile(3);
        double mu = oracle::bisect([](double m) { return std::tanh(m) - m / 2.0; }, 1.5, 2.5);
        Spectrum s = robin_spectrum(p, f, geom, -1.0, 2);
        CHECK(std::abs(s.eigenvalues[0] - (-mu * mu)) <= 1e-5);
    }
    // Neumann limit c = 0: constant eigenfunction, eigenvalue 0
    {
        auto geom = BallGeometry::make(1);
        RadialProfile p = constant_profile(1);
        Spectrum s = robin_spectrum(p, f, geom, 0.0, 1);
        CHECK(std::abs(s.eigenvalues[0]) <= 1e-9);
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (double v : s.eigenfunctions[0]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo <= 1e-7);
    }
}

TEST_CASE("robin spectrum: boundary normalization") {
    auto f = NonlinearitySpec::constant(1.0);
    auto geom = BallGeometry::make(1);
    RadialProfile p = constant_profile(1);
    Spectrum s = robin_spectrum(p, f, geom, -1.0, 1, Normalization::UnitBoundaryValue);
    CHECK(s.eigenfunctions[0].back() == doctest::Approx(1.0).epsilon(1e-12));
    // closed form cosh(mu r)/cosh(mu)
    double mu = oracle::bisect([](double m) { return m * std::tanh(m) - 1.0; }, 0.5, 2.0);
    int mid = (s.grid.n_points - 1) / 2;
    CHECK(s.eigenfunctions[0][mid] ==
          doctest::Approx(std::cosh(mu * 0.5) / std::cosh(mu)).epsilon(1e-6));
}

TEST_CASE("quadratic form: Rayleigh quotient of eigenpairs") {
    auto f = NonlinearitySpec::constant(1.0);
    auto geom = BallGeometry::make(1);
    RadialProfile p = constant_profile(1);

    Spectrum sd = dirichlet_spectrum(p, f, geom, 2);
    for (int j = 0; j < 2; ++j) {
        double q = quadratic_form_Q(p, f, geom, 0.0, sd.grid, sd.eigenfunctions[j], false);
        CHECK(std::abs(q - sd.eigenvalues[j]) <= 1e-6);
    }
    Spectrum sr = robin_spectrum(p, f, geom, -1.0, 2);
    for (int j = 0; j < 2; ++j) {
        double q = quadratic_form_Q(p, f, geom, -1.0, sr.grid, sr.eigenfunctions[j], true);
        CHECK(std::abs(q - sr.eigenvalues[j]) <= 1e-6);
    }
}

TEST_CASE("quadratic form of the profile derivative") {
    // n = 1: Q(phi') = 0 (phi' solves the boundary-linearized problem)
    {
        auto f = NonlinearitySpec::constant(1.0);
        auto geom = BallGeometry::make(1);
        RadialProfile p = constant_profile(1);
        double q = quadratic_form_Q(p, f, geom, p.robin_c, p.grid, p.derivative_values, true);
        CHECK(std::abs(q) <= 1e-6);
    }
    // n = 3, f == 1: closed form -(n-1) omega_n int r^{n-3} phi'^2 = -8 pi/27
    {
        auto f = NonlinearitySpec::constant(1.0);
        auto geom = BallGeometry::make(3);
        RadialProfile p = constant_profile(3);
        double q = quadratic_form_Q(p, f, geom, p.robin_c, p.grid, p.derivative_values, true);
        CHECK(q == doctest::Approx(-8.0 * M_PI / 27.0).epsilon(1e-8));
        double tail = (geom.n - 1) * geom.omega_n * weighted_tail_integral(p, geom);
        CHECK(std::abs(q + tail) <= 1e-4);
    }
    // n = 2, general f: identity against the independent quadrature oracle
    {
        auto f = NonlinearitySpec::power_minus_linear(3.0);
        auto geom = BallGeometry::make(2);
        RadialProfile p = cubic_disk_profile();
        double q = quadratic_form_Q(p, f, geom, p.robin_c, p.grid, p.derivative_values, true);
        double tail_oracle = oracle::romberg(
            [&](double r) {
                if (r <= 0) return 0.0;  // integrand -> 0 at the axis
                double d = eval_profile(p, r).second;
                return d * d / r;  // n = 2: r^{n-3} = 1/r
            },
            0.0, 1.0);
        CHECK(std::abs(q + (geom.n - 1) * geom.omega_n * tail_oracle) <= 1e-4);
    }
}

TEST_CASE("eigenvalue simplicity and orthogonality") {
    auto f = NonlinearitySpec::power_minus_linear(3.0);
    auto geom = BallGeometry::make(2);
    RadialProfile p = cubic_disk_profile();
    Spectrum s = dirichlet_spectrum(p, f, geom, 5);
    for (int j = 1; j < 5; ++j) CHECK(s.eigenvalues[j] - s.eigenvalues[j - 1] > 1e-6);

    std::vector<double> w(s.grid.n_points);
    for (int i = 0; i < s.grid.n_points; ++i) w[i] = std::pow(s.grid.node(i), geom.n - 1);
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
            std::vector<double> prod(s.grid.n_points);
            for (int t = 0; t < s.grid.n_points; ++t)
                prod[t] = s.eigenfunctions[i][t] * s.eigenfunctions[j][t];
            CHECK(std::abs(geom.omega_n * integrate_weighted(prod, w, s.grid)) <= 1e-8);
        }
}

TEST_CASE("assumption check: pass, negative count, degenerate refusal") {
    auto fc = NonlinearitySpec::constant(1.0);
    auto g1 = BallGeometry::make(1);
    RadialProfile p1 = constant_profile(1);
    Spectrum s1 = dirichlet_spectrum(p1, fc, g1, 4);
    AssumptionReport r1 = check_assumptions(s1, 1e-4);
    CHECK(r1.status == AssumptionStatus::Pass);
    CHECK(r1.negative_count == 0);

    // mountain-pass case: exactly one negative eigenvalue
    auto f3 = NonlinearitySpec::power_minus_linear(3.0);
    auto g2 = BallGeometry::make(2);
    RadialProfile p2 = cubic_disk_profile();
    Spectrum s2 = dirichlet_spectrum(p2, f3, g2, 4);
    AssumptionReport r2 = check_assumptions(s2, 1e-4);
    CHECK(r2.status == AssumptionStatus::Pass);
    CHECK(r2.negative_count == 1);
    CHECK(s2.eigenvalues[0] < 0.0);
    CHECK(s2.eigenvalues[1] > 0.0);

    // forced degeneracy: linear f at the first Dirichlet eigenvalue
    auto fl = NonlinearitySpec::linear(M_PI * M_PI / 4.0);
    RadialProfile pl = integrate_profile_at_amplitude(fl, g1, 1.0, 801);
    pl.values.back() = 0.0;
    Spectrum sl = dirichlet_spectrum(pl, fl, g1, 3);
    CHECK(std::abs(sl.eigenvalues[0]) <= 1e-6);
    AssumptionReport rl = check_assumptions(sl, 1e-4);
    CHECK(rl.status == AssumptionStatus::Fail);
}

TEST_CASE("robin gap below the dirichlet ground eigenvalue") {
    struct Case {
        NonlinearitySpec f;
        int n;
        double a_lo, a_hi;
    };
    std::vector<Case> cases = {
        {NonlinearitySpec::constant(1.0), 1, 1e-3, 10.0},
        {NonlinearitySpec::constant(1.0), 3, 1e-3, 10.0},
        {NonlinearitySpec::power_minus_linear(3.0), 2, 1.05, 8.0},
        {NonlinearitySpec::gelfand(0.2), 2, 1e-3, 10.0},
    };
    for (const auto& c : cases) {
        auto geom = BallGeometry::make(c.n);
        ShootingConfig cfg;
        cfg.n_nodes = 801;
        cfg.a_lo = c.a_lo;
        cfg.a_hi = c.a_hi;
        RadialProfile p = solve_ground_profile(c.f, geom, cfg);
        Spectrum sd = dirichlet_spectrum(p, c.f, geom, 3);
        Spectrum sr = robin_spectrum(p, c.f, geom, p.robin_c, 2);
        CHECK(sr.eigenvalues[0] < 0.0);
        CHECK(sr.eigenvalues[0] < sd.eigenvalues[0]);
    }
}

TEST_CASE("spectrum export produces the CSV pair") {
    auto f = NonlinearitySpec::constant(1.0);
    auto geom = BallGeometry::make(1);
    RadialProfile p = constant_profile(1, 201);
    SpectrumConfig cfg;
    cfg.base_nodes = 101;
    Spectrum s = dirichlet_spectrum(p, f, geom, 2, cfg);
    export_spectrum_csv(s, "spec_eigs_test.csv", "spec_fun_test_");
    std::ifstream in("spec_eigs_test.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "index,eigenvalue,err_estimate");
    std::remove("spec_eigs_test.csv");
    std::remove("spec_fun_test_1.csv");
    std::remove("spec_fun_test_2.csv");
}
