#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "ovd/continuation.hpp"

using namespace ovd;

namespace {

struct Lab {
    NonlinearitySpec f = NonlinearitySpec::constant(1.0);
    BallGeometry geom;
    RadialProfile profile;
};

Lab constant_line() {
    Lab lab;
    lab.f = NonlinearitySpec::constant(1.0);
    lab.geom = BallGeometry::make(1);
    ShootingConfig cfg;
    cfg.n_nodes = 2049;
    lab.profile = solve_ground_profile(lab.f, lab.geom, cfg);
    return lab;
}

}  // namespace

TEST_CASE("certification: constant reaction on the segment") {
    Lab lab = constant_line();
    CertifyReport rep = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CHECK(rep.pass);
    CHECK(rep.negative_count == 0);
    CHECK(rep.kernel_dim == 1);
    CHECK(rep.kernel_mode == 1);
    CHECK(rep.cross_diff <= 1e-4);
    CHECK(rep.transversality < 0.0);
    double mu = oracle::bisect([](double m) { return m * std::tanh(m) - 1.0; }, 0.5, 2.0);
    CHECK(rep.t_star_gamma == doctest::Approx(2 * M_PI / mu).epsilon(1e-5));
    // closed-form kernel structure: sigma_k = (2 pi k/T*) tanh(2 pi k/T*) - 1,
    // strictly increasing in k, zero exactly at k = 1
    for (size_t k = 1; k <= rep.sigma_at_t_star.size(); ++k) {
        double om = 2 * M_PI * k / rep.t_star_root;
        CHECK(rep.sigma_at_t_star[k - 1] ==
              doctest::Approx(om * std::tanh(om) - 1.0).epsilon(1e-5));
        if (k >= 2) CHECK(rep.sigma_at_t_star[k - 1] > rep.sigma_at_t_star[k - 2]);
    }
    CHECK(std::abs(rep.sigma_at_t_star[0]) <= 1e-6);
}

TEST_CASE("certification: mountain-pass reaction in the disk") {
    Lab lab;
    lab.f = NonlinearitySpec::power_minus_linear(3.0);
    lab.geom = BallGeometry::make(2);
    ShootingConfig cfg;
    cfg.n_nodes = 2049;
    cfg.a_lo = 1.05;
    cfg.a_hi = 8.0;
    lab.profile = solve_ground_profile(lab.f, lab.geom, cfg);
    CertifyReport rep = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CHECK(rep.pass);
    CHECK(rep.negative_count == 1);
    CHECK(rep.kernel_dim == 1);
    CHECK(rep.kernel_mode == 1);
    CHECK(rep.transversality < 0.0);
    CHECK(rep.t_star_root < rep.t_bar_value);
}

TEST_CASE("certification refuses the degenerate linear family") {
    auto f = NonlinearitySpec::linear(M_PI * M_PI / 4.0);
    auto geom = BallGeometry::make(1);
    RadialProfile p = integrate_profile_at_amplitude(f, geom, 1.0, 2049);
    p.values.back() = 0.0;
    CertifyReport rep = certify_bifurcation(p, f, geom, p.robin_c);
    CHECK_FALSE(rep.pass);
    CHECK(rep.message.find("assumption 2") != std::string::npos);
}

TEST_CASE("branch: trivial point only") {
    Lab lab = constant_line();
    CertifyReport cert = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CylinderSolver solver(lab.profile, lab.f, lab.geom);
    BranchConfig bc;
    bc.K = 4;
    Branch b = extend_branch(solver, cert.t_star_root, {0.0}, bc);
    REQUIRE(b.points.size() == 1);
    CHECK(b.points[0].s == 0.0);
    CHECK(b.points[0].T_s == cert.t_star_root);
    CHECK(b.points[0].v_s.is_zero());
    CHECK(b.points[0].flux_deviation <= 1e-10);
}

TEST_CASE("branch: small amplitudes behave like the kernel direction") {
    Lab lab = constant_line();
    CertifyReport cert = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CylinderSolver solver(lab.profile, lab.f, lab.geom);
    BranchConfig bc;
    bc.K = 6;
    Branch b = extend_branch(solver, cert.t_star_root, {-1e-3, 1e-3}, bc);
    REQUIRE(b.points.size() == 3);
    for (const BranchPoint& p : b.points) {
        if (p.s == 0.0) continue;
        CHECK(p.v_s.coefficients[0] == p.s);  // pinned exactly
        double rem = 0;
        for (size_t k = 1; k < p.v_s.coefficients.size(); ++k)
            rem += p.v_s.coefficients[k] * p.v_s.coefficients[k];
        rem = std::sqrt(rem);
        CHECK(rem <= 10.0 * p.s * p.s);                       // O(s^2) remainder
        CHECK(std::abs(p.T_s - cert.t_star_root) <= 0.5 * std::abs(p.s));
        CHECK(p.flux_deviation <= 1e-8);
        CHECK(p.g_norm <= 1e-9);
    }
}

TEST_CASE("branch over the working amplitude range with diagnostics") {
    Lab lab = constant_line();
    CertifyReport cert = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CylinderSolver solver(lab.profile, lab.f, lab.geom);
    BranchConfig bc;
    bc.K = 8;
    bc.n_threads = 2;
    std::vector<double> s_grid;
    for (int i = 1; i <= 4; ++i) {
        s_grid.push_back(0.05 * i / 4.0);
        s_grid.push_back(-0.05 * i / 4.0);
    }
    Branch b = extend_branch(solver, cert.t_star_root, s_grid, bc);
    CHECK(b.truncation_note.empty());
    REQUIRE(b.points.size() == 9);
    for (size_t i = 1; i < b.points.size(); ++i) CHECK(b.points[i].s > b.points[i - 1].s);
    for (const BranchPoint& p : b.points) {
        CHECK(p.flux_deviation <= 1e-8);
        CHECK(p.g_norm <= 1e-9);
        CHECK(p.T_s > 0.0);
    }

    BranchDiagnostics diag = branch_diagnostics(b);
    CHECK(diag.remainder_slope >= 1.8);
    CHECK(diag.period_slope_constant < 1e3);
    for (const auto& pd : diag.points) {
        CHECK(pd.min_interior_value > 0.0);
        CHECK(pd.mean_zero_residual == 0.0);
        CHECK(pd.evenness_residual == 0.0);
    }
    // +-s symmetry for the reflection-symmetric reaction
    CHECK(diag.symmetry_period_diff <= 1e-6);
    CHECK(diag.symmetry_profile_diff <= 1e-6);

    export_branch_csv(b, "branch_test.csv");
    std::ifstream in("branch_test.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.substr(0, 21) == "s,T_s,flux_constant,v");
    std::remove("branch_test.csv");
}

TEST_CASE("branch truncates gracefully when the domain pinches") {
    Lab lab = constant_line();
    CertifyReport cert = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CylinderSolver solver(lab.profile, lab.f, lab.geom);
    BranchConfig bc;
    bc.K = 4;
    bc.ds_min = 1e-2;  // coarse bisection floor so the test stays quick
    Branch b = extend_branch(solver, cert.t_star_root, {0.02, 1.5}, bc);
    CHECK_FALSE(b.truncation_note.empty());
    CHECK(b.points.back().s == doctest::Approx(0.02));
}

TEST_CASE("adaptive truncation doubles until the tail goes quiet") {
    Lab lab = constant_line();
    CertifyReport cert = certify_bifurcation(lab.profile, lab.f, lab.geom, lab.profile.robin_c);
    CylinderSolver solver(lab.profile, lab.f, lab.geom);
    BranchConfig bc;
    bc.K = 2;  // deliberately too short for s = 0.05
    bc.adapt_modes = true;
    Branch b = extend_branch(solver, cert.t_star_root, {0.05}, bc);
    REQUIRE(b.points.size() == 2);
    const BranchPoint& p = b.points.back();
    CHECK(p.v_s.coefficients.size() >= 8);  // grew from 2
    CHECK(p.flux_deviation <= 1e-8);
    CHECK(p.g_norm <= 1e-9);

    // with adaptation off the short truncation is kept as configured
    bc.adapt_modes = false;
    Branch b2 = extend_branch(solver, cert.t_star_root, {0.05}, bc);
    CHECK(b2.points.back().v_s.coefficients.size() == 2);
}
