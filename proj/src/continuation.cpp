#include "ovd/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ovd {

CertifyReport certify_bifurcation(const RadialProfile& profile, const NonlinearitySpec& f,
                                  const BallGeometry& geom, double c,
                                  const CertifyOptions& opts) {
    CertifyReport rep;

    Spectrum dir = dirichlet_spectrum(profile, f, geom, opts.spectrum_k, opts.spectrum_cfg);
    if (dir.negative_count + 1 >= opts.spectrum_k)
        dir = dirichlet_spectrum(profile, f, geom, dir.negative_count + 2, opts.spectrum_cfg);
    rep.negative_count = dir.negative_count;
    rep.gamma_D1 = dir.eigenvalues[0];

    AssumptionReport ass = check_assumptions(dir, opts.assumption_tol);
    if (ass.status != AssumptionStatus::Pass) {
        rep.pass = false;
        rep.message = ass.message;
        return rep;
    }
    rep.t_bar_value = t_bar(rep.gamma_D1);

    Spectrum rob = robin_spectrum(profile, f, geom, c, std::max(2, dir.negative_count + 2),
                                  Normalization::UnitBoundaryValue, opts.spectrum_cfg);
    rep.gamma_1 = rob.eigenvalues[0];
    if (!(rep.gamma_1 < 0.0) || !(rep.gamma_1 < rep.gamma_D1)) {
        rep.pass = false;
        rep.message = "robin gap estimate violated numerically: gamma_1 = " +
                      std::to_string(rep.gamma_1);
        return rep;
    }
    rep.t_star_gamma = t_star(rep.gamma_1);
    rep.t_star_root = find_t_star_by_root(profile, f, geom, c, rep.t_bar_value, opts.mode_cfg);
    rep.cross_diff = std::abs(rep.t_star_root - rep.t_star_gamma);

    // kernel content of the flux linearization at the bifurcation period
    rep.kernel_dim = 0;
    rep.kernel_mode = 0;
    double best = HUGE_VAL;
    for (int k = 1; k <= opts.k_max; ++k) {
        double sk = mode_solution(profile, f, geom, k, rep.t_star_root, opts.mode_cfg).sigma_k;
        rep.sigma_at_t_star.push_back(sk);
        if (std::abs(sk) <= opts.kernel_tol) ++rep.kernel_dim;
        if (std::abs(sk) < best) {
            best = std::abs(sk);
            rep.kernel_mode = k;
        }
    }

    TransversalityReport tv =
        transversality(profile, f, geom, c, rep.t_star_gamma, rob.eigenfunctions[0], rob.grid,
                       rep.gamma_1, opts.mode_cfg);
    rep.transversality = tv.fd_value;
    rep.transversality_rel_err = tv.rel_err;

    if (rep.kernel_dim != 1 || rep.kernel_mode != 1) {
        rep.pass = false;
        rep.message = "kernel dimension " + std::to_string(rep.kernel_dim) + " at mode " +
                      std::to_string(rep.kernel_mode) + " (need a simple kernel at mode 1)";
    } else if (rep.cross_diff > opts.cross_tol) {
        rep.pass = false;
        rep.message = "independent T* computations disagree by " +
                      std::to_string(rep.cross_diff);
    } else if (!(rep.transversality < 0.0)) {
        rep.pass = false;
        rep.message = "transversal derivative not negative";
    } else {
        rep.pass = true;
        rep.message = "bifurcation certified: simple kernel at mode 1, transversality " +
                      std::to_string(rep.transversality);
    }
    return rep;
}

namespace {

struct OuterState {
    std::vector<double> y;  // v_2..v_K, then T
};

EvenFourierProfile assemble_profile(double s, const std::vector<double>& y, int K) {
    EvenFourierProfile v;
    v.coefficients.assign(K, 0.0);
    v.coefficients[0] = s;
    for (int k = 2; k <= K; ++k) v.coefficients[k - 1] = y[k - 2];
    return v;
}

struct PointSolve {
    BranchPoint point;
    bool ok = false;
    std::string note;
};

// Solve the pinned-amplitude square system at one amplitude.
PointSolve solve_point(const CylinderSolver& solver, double s, OuterState& state,
                       const BranchConfig& cfg, const CylinderField* warm) {
    const int K = cfg.K;
    const int n_unknowns = K;  // v_2..v_K and T
    if (static_cast<int>(state.y.size()) != n_unknowns)
        throw DomainError("extend_branch: outer state dimension mismatch");

    PointSolve out;
    CylinderField base_field;

    auto eval_G = [&](const std::vector<double>& y, const CylinderField* start)
        -> std::vector<double> {
        EvenFourierProfile v = assemble_profile(s, y, K);
        if (v.sup_bound() >= 1.0) throw DomainError("domain validity: ||v|| >= 1");
        double T = y[n_unknowns - 1];
        CylinderField fld = solver.solve(v, T, start);
        DtNResult g = solver.g_operator(fld);
        std::vector<double> r(g.g.coefficients.begin(),
                              g.g.coefficients.begin() + K);
        if (static_cast<int>(r.size()) != K)
            throw DomainError("extend_branch: residual dimension mismatch");
        base_field = std::move(fld);
        return r;
    };

    try {
        std::vector<double> y = state.y;
        std::vector<double> G = eval_G(y, warm);
        double res = 0;
        for (double g : G) res = std::max(res, std::abs(g));

        for (int it = 0; res > cfg.outer_tol; ++it) {
            if (it >= cfg.outer_max_iter)
                throw ConvergenceError("outer Newton stalled, |G| = " + std::to_string(res));
            // forward-difference Jacobian of the K-vector G in the K unknowns
            DenseMatrix J(n_unknowns);
            CylinderField centre = base_field;
            for (int j = 0; j < n_unknowns; ++j) {
                double dj = cfg.fd_step * std::max(1.0, std::abs(y[j]));
                std::vector<double> yp = y;
                yp[j] += dj;
                std::vector<double> Gp = eval_G(yp, &centre);
                for (int i = 0; i < n_unknowns; ++i)
                    J.at(i, j) = (Gp[i] - G[i]) / dj;
            }
            std::vector<double> step(G.begin(), G.end());
            for (double& x : step) x = -x;
            LuFactor lu = lu_factor(std::move(J));
            lu.solve(step);

            double alpha = 1.0;
            bool accepted = false;
            for (int halving = 0; halving < 12; ++halving) {
                std::vector<double> yt = y;
                for (int j = 0; j < n_unknowns; ++j) yt[j] += alpha * step[j];
                if (yt[n_unknowns - 1] <= 0) {  // period must stay positive
                    alpha *= 0.5;
                    continue;
                }
                try {
                    std::vector<double> Gt = eval_G(yt, &centre);
                    double rt = 0;
                    for (double g : Gt) rt = std::max(rt, std::abs(g));
                    if (rt < res) {
                        y = yt;
                        G = Gt;
                        res = rt;
                        accepted = true;
                        break;
                    }
                } catch (const Error&) {
                    // inner solve failed at this trial point; shorten the step
                }
                alpha *= 0.5;
            }
            if (!accepted)
                throw ConvergenceError("outer line search failed, |G| = " + std::to_string(res));
        }

        state.y = y;
        // re-validate through a fresh flux evaluation, independent of the
        // warm-started Newton path
        EvenFourierProfile v = assemble_profile(s, y, K);
        CylinderField fresh = solver.solve(v, y[n_unknowns - 1]);
        DtNResult check = solver.g_operator(fresh);
        double gmax = 0;
        for (int k = 0; k < K; ++k) gmax = std::max(gmax, std::abs(check.g.coefficients[k]));

        out.point.s = s;
        out.point.T_s = y[n_unknowns - 1];
        out.point.v_s = v;
        out.point.field = std::move(fresh);
        out.point.flux_constant = check.mean_flux;
        out.point.newton_residual = std::max(out.point.field.newton_residual, gmax);
        out.point.flux_deviation = check.max_abs_deviation;
        out.point.g_norm = gmax;
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.note = e.what();
    }
    return out;
}

BranchPoint trivial_point(const CylinderSolver& solver, double t_star, int K) {
    BranchPoint p;
    p.s = 0.0;
    p.T_s = t_star;
    p.v_s.coefficients.assign(K, 0.0);
    p.field = solver.solve(p.v_s, t_star);
    DtNResult g = solver.g_operator(p.field);
    p.flux_constant = g.mean_flux;
    p.newton_residual = p.field.newton_residual;
    p.flux_deviation = g.max_abs_deviation;
    p.g_norm = 0.0;
    for (double c : g.g.coefficients) p.g_norm = std::max(p.g_norm, std::abs(c));
    return p;
}

// True when the truncation is too short for the computed profile: the last
// carried coefficient is still active relative to the profile size.
bool last_mode_active(const EvenFourierProfile& v) {
    double norm = 0;
    for (double c : v.coefficients) norm += c * c;
    norm = std::sqrt(norm);
    return norm > 0 && std::abs(v.coefficients.back()) > 1e-10 * norm;
}

// Continue one half-branch (all amplitudes share the sign), nearest first.
std::vector<BranchPoint> half_branch(const CylinderSolver& solver, double t_star,
                                     std::vector<double> targets, const BranchConfig& cfg,
                                     std::string& note) {
    std::sort(targets.begin(), targets.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    std::vector<BranchPoint> points;
    BranchConfig run_cfg = cfg;
    OuterState state;
    state.y.assign(run_cfg.K, 0.0);
    state.y[run_cfg.K - 1] = t_star;
    const CylinderField* warm = nullptr;

    double s_prev = 0.0;
    size_t idx = 0;
    while (idx < targets.size()) {
        double s_target = targets[idx];
        double s_try = s_target;
        // bisect toward the last good amplitude on failure
        for (;;) {
            OuterState trial = state;
            PointSolve ps = solve_point(solver, s_try, trial, run_cfg, warm);
            if (ps.ok && run_cfg.adapt_modes && last_mode_active(ps.point.v_s) &&
                2 * run_cfg.K <= solver.config().modes) {
                // double the carried truncation and redo this amplitude
                int oldK = run_cfg.K;
                run_cfg.K *= 2;
                OuterState grown;
                grown.y.assign(run_cfg.K, 0.0);
                for (int k = 0; k < oldK - 1; ++k) grown.y[k] = trial.y[k];
                grown.y[run_cfg.K - 1] = trial.y[oldK - 1];
                state = grown;
                // regrow earlier points is not needed: their tails were inactive
                continue;
            }
            if (ps.ok) {
                if (s_try == s_target) {
                    points.push_back(std::move(ps.point));
                    state = trial;
                    warm = &points.back().field;
                    s_prev = s_try;
                    ++idx;
                    break;
                }
                // intermediate rescue point: keep as predictor only
                state = trial;
                s_prev = s_try;
                s_try = s_target;
                continue;
            }
            double ds = std::abs(s_try - s_prev) * 0.5;
            if (ds < cfg.ds_min) {
                note = "half-branch truncated at s = " + std::to_string(s_prev) + ": " + ps.note;
                return points;
            }
            s_try = s_prev + (s_try > s_prev ? ds : -ds);
        }
    }
    return points;
}

}  // namespace

Branch extend_branch(const CylinderSolver& solver, double t_star,
                     const std::vector<double>& s_grid, const BranchConfig& cfg) {
    if (cfg.K < 1) throw DomainError("extend_branch: K must be >= 1");
    if (cfg.K > solver.config().modes)
        throw DomainError("extend_branch: K exceeds the solver collocation order");

    std::vector<double> pos, neg;
    for (double s : s_grid) {
        if (s > 0)
            pos.push_back(s);
        else if (s < 0)
            neg.push_back(s);
    }

    Branch branch;
    branch.t_star = t_star;
    branch.kernel_mode = 1;

    std::string note_pos, note_neg;
    std::vector<BranchPoint> points_pos, points_neg;
    parallel_for(2, cfg.n_threads, [&](int side) {
        if (side == 0)
            points_pos = half_branch(solver, t_star, pos, cfg, note_pos);
        else
            points_neg = half_branch(solver, t_star, neg, cfg, note_neg);
    });

    for (auto it = points_neg.rbegin(); it != points_neg.rend(); ++it)
        branch.points.push_back(std::move(*it));
    branch.points.push_back(trivial_point(solver, t_star, cfg.K));
    for (auto& p : points_pos) branch.points.push_back(std::move(p));

    if (!note_neg.empty()) branch.truncation_note += note_neg;
    if (!note_pos.empty()) {
        if (!branch.truncation_note.empty()) branch.truncation_note += "; ";
        branch.truncation_note += note_pos;
    }

    // pad every profile to the largest carried truncation so exports and
    // diagnostics see a uniform coefficient count
    size_t kmax = 0;
    for (const BranchPoint& p : branch.points)
        kmax = std::max(kmax, p.v_s.coefficients.size());
    for (BranchPoint& p : branch.points) p.v_s.coefficients.resize(kmax, 0.0);

    for (size_t i = 1; i < branch.points.size(); ++i)
        if (!(branch.points[i].s > branch.points[i - 1].s))
            throw Error("extend_branch: amplitudes not strictly increasing");
    return branch;
}

BranchDiagnostics branch_diagnostics(const Branch& branch) {
    if (branch.points.empty()) throw DomainError("branch_diagnostics: empty branch");
    BranchDiagnostics d;
    std::vector<double> log_s, log_rem;
    double cmax = 0.0;
    for (const BranchPoint& p : branch.points) {
        BranchPointDiagnostics pd;
        pd.s = p.s;
        pd.T_s = p.T_s;
        pd.flux_residual = p.flux_deviation;
        pd.period_offset = std::abs(p.T_s - branch.t_star);
        double rem = 0;
        for (size_t k = 1; k < p.v_s.coefficients.size(); ++k)
            rem += p.v_s.coefficients[k] * p.v_s.coefficients[k];
        pd.remainder_norm = std::sqrt(rem);
        pd.min_interior_value = HUGE_VAL;
        for (int i = 0; i < p.field.n_cells; ++i)
            for (double x : p.field.values[i])
                pd.min_interior_value = std::min(pd.min_interior_value, x);
        d.points.push_back(pd);
        if (p.s != 0.0) {
            cmax = std::max(cmax, pd.period_offset / std::abs(p.s));
            if (pd.remainder_norm > 1e-12) {
                log_s.push_back(std::log(std::abs(p.s)));
                log_rem.push_back(std::log(pd.remainder_norm));
            }
        }
    }
    d.period_slope_constant = cmax;
    if (log_s.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < log_s.size(); ++i) {
            sx += log_s[i];
            sy += log_rem[i];
            sxx += log_s[i] * log_s[i];
            sxy += log_s[i] * log_rem[i];
        }
        double n = static_cast<double>(log_s.size());
        d.remainder_slope = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-300);
    }
    // symmetry diagnostic over matched +-s pairs
    for (const BranchPoint& p : branch.points) {
        if (p.s <= 0) continue;
        for (const BranchPoint& q : branch.points) {
            if (std::abs(q.s + p.s) < 1e-14) {
                d.symmetry_period_diff =
                    std::max(d.symmetry_period_diff, std::abs(p.T_s - q.T_s));
                for (size_t k = 0; k < p.v_s.coefficients.size(); ++k) {
                    double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k+1} for mode k+1
                    double diff = std::abs(q.v_s.coefficients[k] -
                                           sign * p.v_s.coefficients[k]);
                    d.symmetry_profile_diff = std::max(d.symmetry_profile_diff, diff);
                }
            }
        }
    }
    return d;
}

void export_branch_csv(const Branch& branch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.precision(17);
    out << "s,T_s,flux_constant";
    size_t K = branch.points.empty() ? 0 : branch.points.front().v_s.coefficients.size();
    for (size_t k = 1; k <= K; ++k) out << ",v" << k;
    out << '\n';
    for (const BranchPoint& p : branch.points) {
        out << p.s << ',' << p.T_s << ',' << p.flux_constant;
        for (double c : p.v_s.coefficients) out << ',' << c;
        out << '\n';
    }
}

}  // namespace ovd
