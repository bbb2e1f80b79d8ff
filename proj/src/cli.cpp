#include "ovd/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "ovd/continuation.hpp"

namespace ovd {

namespace {

using json = nlohmann::ordered_json;

json qty(double value, int grid, double err_est) {
    return json{{"value", value}, {"grid", grid}, {"err_est", err_est}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

// Everything the linear-level pipeline produces; sigma/branch reuse it.
struct Analysis {
    NonlinearitySpec f = NonlinearitySpec::constant(1.0);
    BallGeometry geom;
    RadialProfile profile;
    double flux_err_est = 0.0;
    bool scale_invariant_fallback = false;
    std::vector<AmplitudeBracket> brackets;

    Spectrum dirichlet;
    AssumptionReport assumption;
    Spectrum robin;  // boundary-normalized eigenfunctions
    double gamma_D1 = 0.0, gamma_1 = 0.0;
    bool gap_holds = false;
    double T_bar = 0.0, T_star = 0.0, T_star_root = 0.0, cross_diff = 0.0;
    TransversalityReport trans;
    bool linear_ok = false;  // all linear-level checks passed
    std::string failure;
};

ShootingConfig shooting_config(const RunConfig& cfg) {
    ShootingConfig sc;
    sc.a_lo = cfg.a_lo;
    sc.a_hi = cfg.a_hi;
    sc.scan_points = cfg.scan_points;
    sc.n_nodes = cfg.radial_nodes;
    sc.bracket_index = cfg.bracket_index;
    return sc;
}

// Runs the pipeline as far as it can; assumption-level failures end up in
// `failure` with linear_ok = false rather than escaping, so reports can be
// written before the process exits with code 2.
Analysis run_linear_pipeline(const RunConfig& cfg, std::ostream& err) {
    Analysis a;
    a.f = build_nonlinearity(cfg);
    a.f.validate_for_dimension(cfg.dimension);
    a.geom = BallGeometry::make(cfg.dimension);

    ShootingConfig sc = shooting_config(cfg);
    try {
        a.brackets = find_amplitude_brackets(a.f, a.geom, sc);
        a.profile = solve_ground_profile(a.f, a.geom, sc);
    } catch (const ScaleInvariantError& e) {
        // Linear degeneracy: the family is defined up to scale. Pin the
        // amplitude so the spectral checks can still report the zero mode.
        err << "note: " << e.what() << "\n";
        a.scale_invariant_fallback = true;
        a.profile = integrate_profile_at_amplitude(a.f, a.geom, 1.0, sc.n_nodes);
        if (std::abs(a.profile.values.back()) > 1e-8)
            throw AssumptionError(
                "assumption 1 unverified: pinned-amplitude profile does not vanish at r = 1");
        a.profile.values.back() = 0.0;
    }
    {
        RadialProfile half =
            integrate_profile_at_amplitude(a.f, a.geom, a.profile.center_value,
                                           2 * cfg.radial_nodes - 1);
        a.flux_err_est = std::abs(half.d_at_1 - a.profile.d_at_1);
    }

    SpectrumConfig spc;
    spc.base_nodes = cfg.spectra_nodes;
    int k = 8;
    a.dirichlet = dirichlet_spectrum(a.profile, a.f, a.geom, k, spc);
    if (a.dirichlet.negative_count + 2 > k)
        a.dirichlet =
            dirichlet_spectrum(a.profile, a.f, a.geom, a.dirichlet.negative_count + 2, spc);
    a.gamma_D1 = a.dirichlet.eigenvalues[0];
    a.assumption = check_assumptions(a.dirichlet, cfg.assumption_tol);
    if (a.assumption.status != AssumptionStatus::Pass) {
        a.failure = a.assumption.message;
        return a;
    }

    a.robin = robin_spectrum(a.profile, a.f, a.geom, a.profile.robin_c,
                             std::max(2, a.dirichlet.negative_count + 2),
                             Normalization::UnitBoundaryValue, spc);
    a.gamma_1 = a.robin.eigenvalues[0];
    a.gap_holds = (a.gamma_1 < 0.0) && (a.gamma_1 < a.gamma_D1);
    if (!a.gap_holds) {
        a.failure = "robin gap estimate violated numerically (gamma_1 = " +
                    std::to_string(a.gamma_1) + ")";
        return a;
    }

    ModeConfig mc;
    mc.base_cells = cfg.mode_cells;
    a.T_bar = t_bar(a.gamma_D1);
    a.T_star = t_star(a.gamma_1);
    a.T_star_root = find_t_star_by_root(a.profile, a.f, a.geom, a.profile.robin_c, a.T_bar, mc);
    a.cross_diff = std::abs(a.T_star_root - a.T_star);
    a.trans = transversality(a.profile, a.f, a.geom, a.profile.robin_c, a.T_star,
                             a.robin.eigenfunctions[0], a.robin.grid, a.gamma_1, mc);
    a.linear_ok = true;
    return a;
}

json analysis_report(const Analysis& a, const RunConfig& cfg) {
    json j;
    j["problem"] = {{"nonlinearity", a.f.describe()}, {"dimension", cfg.dimension}};
    j["status"] = a.linear_ok ? "pass" : "assumption_failed";
    if (!a.failure.empty()) j["failure"] = a.failure;

    json gp;
    gp["center_value"] = qty(a.profile.center_value, cfg.radial_nodes, a.flux_err_est);
    gp["boundary_flux"] = qty(a.profile.d_at_1, cfg.radial_nodes, a.flux_err_est);
    gp["robin_c"] =
        qty(a.profile.robin_c, cfg.radial_nodes,
            std::abs(a.flux_err_est * a.profile.robin_c / std::max(1e-300, a.profile.d_at_1)));
    gp["ode_residual"] = ode_residual(a.profile, a.f, a.geom);
    gp["scale_invariant_fallback"] = a.scale_invariant_fallback;
    json br = json::array();
    for (const auto& b : a.brackets) br.push_back({{"a_lo", b.a_lo}, {"a_hi", b.a_hi}});
    gp["amplitude_brackets"] = br;
    j["ground_profile"] = gp;

    const int spectral_grid = 4 * (cfg.spectra_nodes - 1) + 1;
    json gd = json::array();
    for (size_t i = 0; i < a.dirichlet.eigenvalues.size(); ++i)
        gd.push_back(qty(a.dirichlet.eigenvalues[i], spectral_grid, a.dirichlet.err_estimates[i]));
    j["dirichlet"] = {{"eigenvalues", gd}, {"negative_count", a.dirichlet.negative_count}};

    json ac;
    switch (a.assumption.status) {
        case AssumptionStatus::Pass:
            ac["status"] = "pass";
            break;
        case AssumptionStatus::Fail:
            ac["status"] = "fail";
            break;
        case AssumptionStatus::Inconclusive:
            ac["status"] = "inconclusive";
            break;
    }
    ac["negative_count"] = a.assumption.negative_count;
    ac["min_abs_eigenvalue"] = a.assumption.min_abs_eigenvalue;
    ac["max_err_estimate"] = a.assumption.max_err_estimate;
    ac["tol"] = a.assumption.tol;
    ac["message"] = a.assumption.message;
    j["assumption_check"] = ac;

    if (a.linear_ok) {
        j["robin"] = {{"gamma_1", qty(a.gamma_1, spectral_grid, a.robin.err_estimates[0])}};
        j["gap_check"] = {{"holds", a.gap_holds},
                          {"gamma_1", a.gamma_1},
                          {"bound", std::min(0.0, a.gamma_D1)}};
        double gamma_err = a.robin.err_estimates[0];
        double tstar_err = 0.5 * a.T_star * gamma_err / std::abs(a.gamma_1);
        json th;
        if (std::isfinite(a.T_bar)) {
            double tbar_err =
                0.5 * a.T_bar * a.dirichlet.err_estimates[0] / std::abs(a.gamma_D1);
            th["T_bar"] = qty(a.T_bar, spectral_grid, tbar_err);
        } else {
            th["T_bar"] = "inf";
        }
        th["T_star"] = qty(a.T_star, spectral_grid, tstar_err);
        th["T_star_root"] = qty(a.T_star_root, 2 * cfg.mode_cells + 1, a.cross_diff);
        th["cross_diff"] = a.cross_diff;
        j["thresholds"] = th;
        j["transversality"] = {{"value", a.trans.fd_value},
                               {"reference", a.trans.reference_value},
                               {"rel_err", a.trans.rel_err},
                               {"consistency_residual", a.trans.consistency_residual},
                               {"grid", 2 * cfg.mode_cells + 1}};
    }
    return j;
}

int guard(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const AssumptionError& e) {
        err << "assumption failure: " << e.what() << "\n";
        return kExitAssumption;
    } catch (const Error& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

void ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() {
        ensure_out_dir(cfg);
        Analysis a;
        try {
            a = run_linear_pipeline(cfg, err);
        } catch (const AssumptionError& e) {
            // write a minimal failure report before exiting with code 2
            json j;
            j["problem"] = {{"nonlinearity", cfg.nonlinearity}, {"dimension", cfg.dimension}};
            j["status"] = "assumption_failed";
            j["failure"] = e.what();
            write_json(j, cfg.out_dir + "/analyze.json");
            throw;
        }
        json j = analysis_report(a, cfg);
        write_json(j, cfg.out_dir + "/analyze.json");
        export_profile_csv(a.profile, cfg.out_dir + "/profile.csv");
        export_spectrum_csv(a.dirichlet, cfg.out_dir + "/dirichlet_eigenvalues.csv",
                            cfg.out_dir + "/dirichlet_eigenfunction_");
        if (a.linear_ok)
            export_spectrum_csv(a.robin, cfg.out_dir + "/robin_eigenvalues.csv",
                                cfg.out_dir + "/robin_eigenfunction_");
        out << "analyze: " << (a.linear_ok ? "pass" : "assumption failure") << "\n";
        if (a.linear_ok) {
            out << "  gamma_D1 = " << a.gamma_D1 << ", l = " << a.dirichlet.negative_count
                << ", gamma_1 = " << a.gamma_1 << "\n";
            out << "  T_bar = " << a.T_bar << ", T_star = " << a.T_star
                << " (cross-check diff " << a.cross_diff << ")\n";
        } else {
            err << a.failure << "\n";
        }
        return a.linear_ok ? kExitOk : kExitAssumption;
    });
}

int cmd_sigma(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() {
        ensure_out_dir(cfg);
        Analysis a = run_linear_pipeline(cfg, err);
        if (!a.linear_ok) {
            err << a.failure << "\n";
            return kExitAssumption;
        }
        double lo = cfg.T_min, hi = cfg.T_max;
        if (lo == 0.0 && hi == 0.0) {
            lo = 0.5 * a.T_star;
            hi = std::min(1.5 * a.T_star, 0.98 * a.T_bar);
        }
        double cap = 0.995 * a.T_bar;
        if (hi > cap) {
            err << "warning: T range clipped at " << cap
                << " (below the invertibility threshold)\n";
            hi = cap;
        }
        std::vector<double> T_range;
        if (cfg.T_samples > 0 && lo < hi && lo > 0) {
            for (int i = 0; i < cfg.T_samples; ++i)
                T_range.push_back(lo + (hi - lo) * i / std::max(1, cfg.T_samples - 1));
        }
        ModeConfig mc;
        mc.base_cells = cfg.mode_cells;
        SigmaCurve curve = sigma_curve(a.profile, a.f, a.geom, a.profile.robin_c, T_range,
                                       cfg.k_max, mc, cfg.threads);
        export_sigma_csv(curve, cfg.out_dir + "/sigma.csv");
        out << "sigma: " << curve.T_values.size() << " samples written\n";
        return kExitOk;
    });
}

int cmd_branch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() {
        ensure_out_dir(cfg);
        Analysis a = run_linear_pipeline(cfg, err);
        if (!a.linear_ok) {
            err << a.failure << "\n";
            return kExitAssumption;
        }
        CertifyOptions copts;
        copts.k_max = cfg.k_max;
        copts.assumption_tol = cfg.assumption_tol;
        copts.spectrum_cfg.base_nodes = cfg.spectra_nodes;
        copts.mode_cfg.base_cells = cfg.mode_cells;
        CertifyReport cert =
            certify_bifurcation(a.profile, a.f, a.geom, a.profile.robin_c, copts);
        json jc;
        jc["pass"] = cert.pass;
        jc["message"] = cert.message;
        jc["t_star"] = cert.t_star_gamma;
        jc["t_star_root"] = cert.t_star_root;
        jc["kernel_dim"] = cert.kernel_dim;
        jc["kernel_mode"] = cert.kernel_mode;
        jc["sigma_at_t_star"] = cert.sigma_at_t_star;
        jc["transversality"] = cert.transversality;
        write_json(jc, cfg.out_dir + "/certify.json");
        if (!cert.pass) {
            err << "certification failed: " << cert.message << "\n";
            return kExitAssumption;
        }

        CylinderSolverConfig scfg;
        scfg.radial_cells = cfg.field_radial_cells;
        scfg.modes = cfg.t_modes;
        scfg.newton_tol = cfg.newton_tol;
        CylinderSolver solver(a.profile, a.f, a.geom, scfg);

        std::vector<double> s_grid;
        for (int i = 1; i <= cfg.s_steps; ++i) {
            double s = cfg.s_max * i / cfg.s_steps;
            s_grid.push_back(s);
            s_grid.push_back(-s);
        }
        BranchConfig bc;
        bc.K = cfg.branch_modes;
        bc.n_threads = cfg.threads;
        Branch branch = extend_branch(solver, cert.t_star_root, s_grid, bc);
        BranchDiagnostics diag = branch_diagnostics(branch);

        export_branch_csv(branch, cfg.out_dir + "/branch.csv");
        if (cfg.dump_fields) {
            for (size_t i = 0; i < branch.points.size(); ++i) {
                const BranchPoint& p = branch.points[i];
                std::string stem = cfg.out_dir + "/branch_point_" + std::to_string(i);
                export_field_csv(p.field, stem + "_field.csv");
                DtNResult g = solver.g_operator(p.field);
                export_dtn_json(g, stem + "_flux.json");
            }
        }
        json jd;
        jd["t_star"] = branch.t_star;
        jd["truncation_note"] = branch.truncation_note;
        jd["remainder_slope"] = diag.remainder_slope;
        jd["period_slope_constant"] = diag.period_slope_constant;
        jd["symmetry_period_diff"] = diag.symmetry_period_diff;
        jd["symmetry_profile_diff"] = diag.symmetry_profile_diff;
        json pts = json::array();
        for (const auto& p : diag.points)
            pts.push_back({{"s", p.s},
                           {"T_s", p.T_s},
                           {"flux_residual", p.flux_residual},
                           {"min_interior_value", p.min_interior_value},
                           {"remainder_norm", p.remainder_norm},
                           {"period_offset", p.period_offset}});
        jd["points"] = pts;
        write_json(jd, cfg.out_dir + "/branch_diagnostics.json");
        out << "branch: " << branch.points.size() << " points, remainder slope "
            << diag.remainder_slope << "\n";
        if (!branch.truncation_note.empty()) err << "note: " << branch.truncation_note << "\n";
        return kExitOk;
    });
}

namespace {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tol = 0.0;
};

void add_check(std::vector<VerifyCheck>& checks, const std::string& name, double measured,
               double tol, bool pass_is_below = true) {
    VerifyCheck c;
    c.name = name;
    c.measured = measured;
    c.tol = tol;
    c.pass = pass_is_below ? (measured <= tol) : (measured > tol);
    checks.push_back(c);
}

}  // namespace

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guard(err, [&]() {
        ensure_out_dir(cfg);
        std::vector<VerifyCheck> checks;

        // --- numerics kernels ---
        {
            const int N = 60;
            SymTridiag m;
            m.diag.assign(N, 2.0);
            m.off.assign(N - 1, -1.0);
            auto pairs = sym_tridiag_eigs(m, N);
            double worst = 0, trace_sum = 0;
            for (int j = 0; j < N; ++j) {
                double exact = 2.0 - 2.0 * std::cos((j + 1) * M_PI / (N + 1));
                worst = std::max(worst, std::abs(pairs[j].value - exact));
                trace_sum += pairs[j].value;
            }
            add_check(checks, "tridiag_eigs_closed_form", worst, 1e-10);
            add_check(checks, "tridiag_trace_identity", std::abs(trace_sum - 2.0 * N), 1e-9);

            double r1 = find_root([](double x) { return x * x - 4.0; }, 0.0, 3.0, 1e-8);
            double r2 = find_root([](double x) { return x * x - 4.0; }, 0.0, 3.0, 1e-8);
            add_check(checks, "find_root_square", std::abs(r1 - 2.0), 1e-8);
            add_check(checks, "find_root_deterministic", std::abs(r1 - r2), 0.0);

            UniformGrid1D g(201, 0.0, 1.0);
            std::vector<double> vals(201), w(201, 1.0);
            for (int i = 0; i < 201; ++i) vals[i] = g.node(i) * g.node(i);
            add_check(checks, "quadrature_r2",
                      std::abs(integrate_weighted(vals, w, g) - 1.0 / 3.0), 1e-10);
        }

        NonlinearitySpec f = build_nonlinearity(cfg);
        f.validate_for_dimension(cfg.dimension);
        BallGeometry geom = BallGeometry::make(cfg.dimension);

        // --- nonlinearity derivative consistency ---
        if (cfg.nonlinearity != "tabulated") {
            double worst = 0;
            for (double u : {0.5, 1.0, 2.0, 3.0}) {
                double h = 1e-4;
                double fd = (f.eval(u + h) - f.eval(u - h)) / (2 * h);
                worst = std::max(worst, std::abs(fd - f.eval_deriv(u)));
            }
            add_check(checks, "nonlinearity_fd_consistency", worst, 1e-5);
        }

        // --- ground profile ---
        Analysis a = run_linear_pipeline(cfg, err);
        add_check(checks, "profile_ode_residual", ode_residual(a.profile, a.f, geom), 1e-8);
        add_check(checks, "profile_boundary_zero", std::abs(a.profile.values.back()), 1e-10);
        {
            double h = a.profile.grid.spacing();
            double curv = 2.0 * (a.profile.values[1] - a.profile.values[0]) / (h * h);
            double expect = -f.eval_extended(a.profile.center_value) / geom.n;
            add_check(checks, "profile_series_curvature", std::abs(curv - expect),
                      std::max(1e-6, 100.0 * h * h));
        }

        // --- ball spectra ---
        if (!a.linear_ok) {
            add_check(checks, "assumption_2_nondegenerate",
                      a.assumption.min_abs_eigenvalue, cfg.assumption_tol, false);
        } else {
            add_check(checks, "assumption_2_nondegenerate",
                      a.assumption.min_abs_eigenvalue, cfg.assumption_tol, false);
            double min_gap = HUGE_VAL;
            for (size_t i = 1; i < a.dirichlet.eigenvalues.size(); ++i)
                min_gap = std::min(min_gap, a.dirichlet.eigenvalues[i] -
                                                a.dirichlet.eigenvalues[i - 1]);
            add_check(checks, "dirichlet_simplicity_gap", min_gap, 1e-6, false);

            // weighted orthogonality of the first eigenfunctions
            {
                const Spectrum& sp = a.dirichlet;
                const int n = sp.grid.n_points;
                std::vector<double> w(n);
                for (int i = 0; i < n; ++i)
                    w[i] = std::pow(sp.grid.node(i), geom.n - 1);
                double worst = 0;
                for (size_t i = 0; i < sp.eigenfunctions.size(); ++i)
                    for (size_t k = i + 1; k < sp.eigenfunctions.size(); ++k) {
                        std::vector<double> prod(n);
                        for (int t = 0; t < n; ++t)
                            prod[t] = sp.eigenfunctions[i][t] * sp.eigenfunctions[k][t];
                        worst = std::max(worst, std::abs(geom.omega_n *
                                                         integrate_weighted(prod, w, sp.grid)));
                    }
                add_check(checks, "dirichlet_orthogonality", worst, 1e-8);
            }
            // Rayleigh consistency on the Robin ground mode (L2 normalization)
            {
                Spectrum robL2 =
                    robin_spectrum(a.profile, a.f, geom, a.profile.robin_c, 2,
                                   Normalization::UnitL2Ball,
                                   SpectrumConfig{cfg.spectra_nodes});
                double q = quadratic_form_Q(a.profile, a.f, geom, a.profile.robin_c,
                                            robL2.grid, robL2.eigenfunctions[0], true);
                add_check(checks, "robin_rayleigh_consistency",
                          std::abs(q - robL2.eigenvalues[0]), 1e-6);
            }
            add_check(checks, "robin_below_dirichlet",
                      std::min(0.0, a.gamma_D1) - a.gamma_1, 0.0, false);
            {
                double qd = quadratic_form_Q(a.profile, a.f, geom, a.profile.robin_c,
                                             a.profile.grid, a.profile.derivative_values, true);
                if (geom.n >= 2) {
                    double tail = (geom.n - 1) * geom.omega_n *
                                  weighted_tail_integral(a.profile, geom);
                    add_check(checks, "flux_qform_identity", std::abs(qd + tail), 1e-4);
                } else {
                    add_check(checks, "flux_qform_identity_1d", std::abs(qd), 1e-6);
                }
            }

            // --- cylinder level ---
            add_check(checks, "t_star_cross_validation", a.cross_diff, 1e-4);
            {
                ModeConfig mc;
                mc.base_cells = cfg.mode_cells;
                double worst = 0;
                bool dominated = true;
                for (int i = 1; i <= 10; ++i) {
                    double cap = std::isfinite(a.T_bar) ? 0.95 * a.T_bar : 2.0 * a.T_star;
                    double T = cap * i / 10.0;
                    if (T <= 0.05) continue;
                    double s1 =
                        mode_solution(a.profile, a.f, geom, 1, T, mc).sigma_k;
                    for (int k = 2; k <= cfg.k_max; ++k) {
                        double sk = mode_solution(a.profile, a.f, geom, k, T, mc).sigma_k;
                        if (s1 > sk + 1e-12) dominated = false;
                        worst = std::max(worst, s1 - sk);
                    }
                }
                add_check(checks, "mode_1_dominates", dominated ? 0.0 : worst, 0.0);

                std::vector<double> v = {0.7, -0.2, 0.05};
                double T = 0.8 * a.T_star;
                std::vector<double> sigmas;
                for (int k = 1; k <= 3; ++k)
                    sigmas.push_back(mode_solution(a.profile, a.f, geom, k, T, mc).sigma_k);
                double lhs = qt_separable(a.profile, a.f, geom, a.profile.robin_c, v, T, mc);
                double rhs = T * geom.omega_n * jt_quadratic(v, T, sigmas);
                add_check(checks, "flux_form_energy_identity", std::abs(lhs - rhs), 1e-6);

                AlphaBeta ab1 = alpha_beta(a.dirichlet, a.gamma_1, 0.6 * a.T_star);
                AlphaBeta ab2 = alpha_beta(a.dirichlet, a.gamma_1, 0.9 * a.T_star);
                bool monotone = ab1.alpha >= ab2.alpha - 1e-12 && ab1.beta >= ab2.beta - 1e-12;
                add_check(checks, "alpha_beta_monotone", monotone ? 0.0 : 1.0, 0.0);
            }

            // --- 2D flux operator ---
            CylinderSolverConfig scfg;
            scfg.radial_cells = cfg.field_radial_cells;
            scfg.modes = cfg.t_modes;
            scfg.newton_tol = cfg.newton_tol;
            CylinderSolver solver(a.profile, a.f, geom, scfg);
            double T_work = 0.8 * a.T_star;
            {
                EvenFourierProfile zero;
                zero.coefficients.assign(4, 0.0);
                CylinderField fld = solver.solve(zero, T_work);
                double worst = 0;
                for (int i = 0; i <= fld.n_cells; ++i) {
                    double ref = eval_profile(a.profile, solver.rho_node(i)).first;
                    for (double x : fld.values[i])
                        worst = std::max(worst, std::abs(x - ref));
                }
                add_check(checks, "field_v0_equals_profile", worst, 1e-10);
                DtNResult g = solver.g_operator(fld);
                double gmax = 0;
                for (double c : g.g.coefficients) gmax = std::max(gmax, std::abs(c));
                add_check(checks, "dtn_zero_at_v0", gmax, 1e-10);
            }
            {
                // chain-rule validation on an analytic field
                EvenFourierProfile v;
                v.coefficients = {0.08, -0.03};
                auto run_defect = [&](int cells) {
                    CylinderSolverConfig c2 = scfg;
                    c2.radial_cells = cells;
                    CylinderSolver s2(a.profile, a.f, geom, c2);
                    const int P = c2.modes + 1;
                    std::vector<std::vector<double>> vals(cells + 1,
                                                          std::vector<double>(P));
                    std::vector<std::vector<double>> exact(cells, std::vector<double>(P));
                    double lambda = 1.0 / (T_work * T_work);
                    auto gfun = [](double w) { return std::exp(-w); };
                    auto gp = [](double w) { return -std::exp(-w); };
                    auto gpp = [](double w) { return std::exp(-w); };
                    auto hfun = [](double s) {
                        return 1.0 + 0.4 * std::cos(2 * M_PI * s) +
                               0.1 * std::cos(4 * M_PI * s);
                    };
                    auto hpp = [](double s) {
                        return -0.4 * std::pow(2 * M_PI, 2) * std::cos(2 * M_PI * s) -
                               0.1 * std::pow(4 * M_PI, 2) * std::cos(4 * M_PI * s);
                    };
                    for (int m = 0; m < P; ++m) {
                        double s = static_cast<double>(m) / (2 * c2.modes);
                        double R = 1.0 + v.eval(s);
                        for (int i = 0; i <= cells; ++i) {
                            double r = R * static_cast<double>(i) / cells;
                            vals[i][m] = gfun(r * r) * hfun(s);
                            if (i < cells) {
                                double lap_x = (2.0 * geom.n * gp(r * r) +
                                                4.0 * r * r * gpp(r * r)) *
                                               hfun(s);
                                exact[i][m] = lap_x + lambda * gfun(r * r) * hpp(s);
                            }
                        }
                    }
                    auto got = s2.apply_linear_part(vals, v, T_work);
                    double worst = 0;
                    for (int i = 0; i < cells; ++i)
                        for (int m = 0; m < P; ++m)
                            worst = std::max(worst, std::abs(got[i][m] - exact[i][m]));
                    return worst;
                };
                double e_coarse = run_defect(cfg.field_radial_cells / 2);
                double e_fine = run_defect(cfg.field_radial_cells);
                add_check(checks, "pullback_operator_defect", e_fine, 1e-4);
                double order = std::log2(std::max(e_coarse, 1e-300) /
                                         std::max(e_fine, 1e-300));
                add_check(checks, "pullback_operator_order", order, 1.6, false);
            }
            {
                ModeConfig mc;
                mc.base_cells = cfg.mode_cells;
                // the reconciliation uses the finer, extrapolated linear
                // instance: no nonlinear residual floor applies there
                CylinderSolverConfig fine_cfg = scfg;
                fine_cfg.radial_cells = 2 * cfg.field_radial_cells;
                int kr = std::min(cfg.k_max, cfg.t_modes);
                std::vector<double> s2d =
                    ht_sigma_2d(a.profile, a.f, geom, T_work, kr, fine_cfg);
                double worst = 0;
                for (int k = 1; k <= kr; ++k) {
                    double sigmam =
                        mode_solution(a.profile, a.f, geom, k, T_work, mc).sigma_k;
                    worst = std::max(worst, std::abs(s2d[k - 1] - sigmam));
                }
                add_check(checks, "flux_linearization_2d_vs_mode", worst, 5e-5);

                EvenFourierProfile w1, w2;
                w1.coefficients = {0.3, -0.1, 0.05, 0.02};
                w2.coefficients = {-0.2, 0.15, 0.0, 0.07};
                EvenFourierProfile h1 = solver.ht_apply_2d(w1, T_work);
                EvenFourierProfile h2 = solver.ht_apply_2d(w2, T_work);
                auto dot = [](const EvenFourierProfile& x, const EvenFourierProfile& y) {
                    double s = 0;
                    size_t n = std::min(x.coefficients.size(), y.coefficients.size());
                    for (size_t i = 0; i < n; ++i)
                        s += 0.5 * x.coefficients[i] * y.coefficients[i];
                    return s;
                };
                add_check(checks, "flux_linearization_self_adjoint",
                          std::abs(dot(h1, w2) - dot(h2, w1)), 1e-8);

                EvenFourierProfile v1;
                v1.coefficients = {1.0};
                OrthogonalityReport orep = solver.orthogonality_check(v1, T_work, a.dirichlet);
                add_check(checks, "linear_field_orthogonality", orep.max_abs, 1e-8);

                double lhs = solver.qt_from_2d_field(w1, T_work);
                std::vector<double> sig;
                for (int k = 1; k <= 4; ++k)
                    sig.push_back(mode_solution(a.profile, a.f, geom, k, T_work, mc).sigma_k);
                double rhs = T_work * geom.omega_n *
                             jt_quadratic(w1.coefficients, T_work, sig);
                add_check(checks, "flux_form_energy_identity_2d", std::abs(lhs - rhs), 1e-6);
            }
            {
                EvenFourierProfile w;
                w.coefficients = {1.0};
                FdLinearizationReport fd =
                    solver.fd_linearization_check(w, T_work, {1e-2, 1e-3, 1e-4});
                add_check(checks, "linearization_identity_order", fd.empirical_order, 0.9,
                          false);
            }

            // --- continuation ---
            CertifyOptions copts;
            copts.k_max = cfg.k_max;
            copts.assumption_tol = cfg.assumption_tol;
            copts.spectrum_cfg.base_nodes = cfg.spectra_nodes;
            copts.mode_cfg.base_cells = cfg.mode_cells;
            CertifyReport cert =
                certify_bifurcation(a.profile, a.f, geom, a.profile.robin_c, copts);
            add_check(checks, "bifurcation_certified", cert.pass ? 0.0 : 1.0, 0.0);
            if (cert.pass) {
                BranchConfig bc;
                bc.K = std::min(6, cfg.branch_modes);
                Branch b = extend_branch(solver, cert.t_star_root, {-0.01, 0.01}, bc);
                double worst_dev = 0, worst_g = 0;
                for (const auto& p : b.points) {
                    worst_dev = std::max(worst_dev, p.flux_deviation);
                    worst_g = std::max(worst_g, p.g_norm);
                }
                add_check(checks, "branch_flux_deviation", worst_dev, 1e-8);
                add_check(checks, "branch_residual", worst_g, 1e-9);
            }
        }

        // report
        json j;
        json items = json::array();
        int failures = 0;
        for (const auto& c : checks) {
            out << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                << " tol=" << c.tol << "\n";
            if (!c.pass) ++failures;
            items.push_back(
                {{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"tol", c.tol}});
        }
        j["checks"] = items;
        j["failures"] = failures;
        write_json(j, cfg.out_dir + "/verify.json");
        out << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: " + std::to_string(failures) + " checks failed\n");
        return failures == 0 ? kExitOk : kExitNumerical;
    });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        err << "usage: ondulab <analyze|sigma|branch|verify> [--config PATH] [--out DIR] "
               "[--threads N]\n";
        return kExitUsage;
    }
    const std::string cmd = args[0];
    std::string config_path, out_dir;
    int threads = 0;
    for (size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto need_value = [&](const char* flag) -> const std::string& {
            if (i + 1 >= args.size()) {
                throw ConfigError(std::string("missing value for ") + flag);
            }
            return args[++i];
        };
        try {
            if (a == "--config")
                config_path = need_value("--config");
            else if (a == "--out")
                out_dir = need_value("--out");
            else if (a == "--threads") {
                const std::string& v = need_value("--threads");
                try {
                    threads = std::stoi(v);
                } catch (const std::exception&) {
                    throw ConfigError("bad --threads value: " + v);
                }
                if (threads < 1) throw ConfigError("--threads must be >= 1");
            } else {
                err << "unknown flag: " << a << "\n";
                return kExitUsage;
            }
        } catch (const ConfigError& e) {
            err << e.what() << "\n";
            return kExitUsage;
        }
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = parse_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads > 0) cfg.threads = threads;
        validate_config(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (cmd == "analyze") return cmd_analyze(cfg, out, err);
    if (cmd == "sigma") return cmd_sigma(cfg, out, err);
    if (cmd == "branch") return cmd_branch(cfg, out, err);
    if (cmd == "verify") return cmd_verify(cfg, out, err);
    err << "unknown command: " << cmd << "\n";
    return kExitUsage;
}

}  // namespace ovd
