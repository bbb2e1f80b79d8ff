#include "ovd/cylinder_spectra.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace ovd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct ModeLevel {
    RadialFv fv;
    std::vector<double> q;  // f'(phi1) at the nodes
};

ModeLevel make_level(const RadialProfile& profile, const NonlinearitySpec& f,
                     const BallGeometry& geom, int cells) {
    ModeLevel lv;
    lv.fv = make_radial_fv(cells, geom.n);
    lv.q = sample_potential(profile, f, cells);
    return lv;
}

// Three grids for the boundary flux: the solution error is h^2 + h^4, so two
// Richardson stages leave O(h^6).
struct ModeLadder {
    ModeLevel l1, l2, l3;

    ModeLadder(const RadialProfile& profile, const NonlinearitySpec& f,
               const BallGeometry& geom, int base_cells)
        : l1(make_level(profile, f, geom, base_cells)),
          l2(make_level(profile, f, geom, 2 * base_cells)),
          l3(make_level(profile, f, geom, 4 * base_cells)) {}
};

// Solve the shifted two-point problem on one level and return the nodal
// values (rho(1) = 1 appended) plus the one-sided O(h^2) boundary flux.
std::pair<std::vector<double>, double> mode_solve_level(const ModeLevel& lv, double omega2) {
    const int N = lv.fv.n_cells;
    const double h = lv.fv.h;
    // rows are scaled by the cell masses: the raw finite-volume rows carry the
    // r^{n-1} weight, which for larger n makes the axis rows many orders
    // smaller than the boundary ones and defeats the pivot-ratio guard
    std::vector<double> dl(N - 1), d(N), du(N - 1), b(N, 0.0);
    d[0] = (lv.fv.flux_w[0] / h) / lv.fv.mass[0] - (lv.q[0] - omega2);
    for (int i = 1; i < N; ++i)
        d[i] = ((lv.fv.flux_w[i - 1] + lv.fv.flux_w[i]) / h) / lv.fv.mass[i] -
               (lv.q[i] - omega2);
    for (int i = 0; i + 1 < N; ++i) {
        du[i] = -lv.fv.flux_w[i] / h / lv.fv.mass[i];
        dl[i] = -lv.fv.flux_w[i] / h / lv.fv.mass[i + 1];
    }
    b[N - 1] = lv.fv.flux_w[N - 1] / h / lv.fv.mass[N - 1];  // rho(1) = 1 moved over
    try {
        solve_tridiag(dl, d, du, b, 1e-13);
    } catch (const ConditioningError&) {
        throw ConditioningError(
            "mode solve near singular: shifted cylinder operator degenerate "
            "(T at or beyond the invertibility threshold?)");
    }
    b.push_back(1.0);
    // fourth-order one-sided stencil keeps the stencil truncation below the
    // Richardson-extrapolated solution error even for fast-decaying modes
    double flux = (25.0 * b[N] - 48.0 * b[N - 1] + 36.0 * b[N - 2] - 16.0 * b[N - 3] +
                   3.0 * b[N - 4]) /
                  (12.0 * h);
    return {std::move(b), flux};
}


double ladder_flux(const ModeLadder& lad, double omega2) {
    double f1 = mode_solve_level(lad.l1, omega2).second;
    double f2 = mode_solve_level(lad.l2, omega2).second;
    double f3 = mode_solve_level(lad.l3, omega2).second;
    double g1 = (4.0 * f2 - f1) / 3.0;
    double g2 = (4.0 * f3 - f2) / 3.0;
    return (16.0 * g2 - g1) / 15.0;
}

}  // namespace

double t_bar(double gamma_D1) {
    if (gamma_D1 == 0.0)
        throw DomainError("t_bar: gamma_D1 = 0 (degenerate linearization)");
    if (gamma_D1 > 0.0) return std::numeric_limits<double>::infinity();
    return kTwoPi / std::sqrt(-gamma_D1);
}

double t_star(double gamma_1) {
    if (!(gamma_1 < 0.0))
        throw AssumptionError("t_star: gamma_1 >= 0 contradicts the Robin gap estimate");
    return kTwoPi / std::sqrt(-gamma_1);
}

ModeProfile mode_solution(const RadialProfile& profile, const NonlinearitySpec& f,
                          const BallGeometry& geom, int k, double T, const ModeConfig& cfg) {
    if (k < 0) throw DomainError("mode_solution: k must be >= 0");
    if (!(T > 0)) throw DomainError("mode_solution: T must be positive");
    const double omega = kTwoPi * k / T;
    const double omega2 = omega * omega;

    ModeLadder lad(profile, f, geom, cfg.base_cells);
    ModeProfile mp;
    mp.k = k;
    mp.T = T;
    mp.values = mode_solve_level(lad.l2, omega2).first;
    mp.grid = UniformGrid1D(2 * cfg.base_cells + 1, 0.0, 1.0);
    mp.flux = ladder_flux(lad, omega2);
    mp.sigma_k = mp.flux + profile.robin_c;
    return mp;
}

SigmaCurve sigma_curve(const RadialProfile& profile, const NonlinearitySpec& f,
                       const BallGeometry& geom, double c, const std::vector<double>& T_range,
                       int k_max, const ModeConfig& cfg, int n_threads) {
    if (k_max < 1) throw DomainError("sigma_curve: k_max must be >= 1");
    ModeLadder lad(profile, f, geom, cfg.base_cells);

    SigmaCurve curve;
    curve.T_values = T_range;
    curve.sigma_values.assign(T_range.size(), 0.0);
    curve.minimizing_k.assign(T_range.size(), 0);
    parallel_for(static_cast<int>(T_range.size()), n_threads, [&](int idx) {
        double T = T_range[idx];
        double best = HUGE_VAL;
        int best_k = 0;
        for (int k = 1; k <= k_max; ++k) {
            double omega = kTwoPi * k / T;
            double sigma = ladder_flux(lad, omega * omega) + c;
            if (sigma < best) {
                best = sigma;
                best_k = k;
            }
        }
        curve.sigma_values[idx] = best;
        curve.minimizing_k[idx] = best_k;
    });
    return curve;
}

double find_t_star_by_root(const RadialProfile& profile, const NonlinearitySpec& f,
                           const BallGeometry& geom, double c, double t_bar_value,
                           const ModeConfig& cfg) {
    ModeLadder lad(profile, f, geom, cfg.base_cells);
    auto sigma1 = [&](double T) {
        double omega = kTwoPi / T;
        return ladder_flux(lad, omega * omega) + c;
    };

    // T* can sit arbitrarily close below the invertibility threshold when the
    // Robin-Dirichlet gap is small, so probe almost up to it; the conditioning
    // guard protects the solves at the near-degenerate end
    const bool finite_bar = std::isfinite(t_bar_value);
    const double hi_limit = finite_bar ? (1.0 - 1e-4) * t_bar_value : 1e6;

    // grow until sigma_1 turns negative
    double T_hi = std::min(1.0, 0.5 * hi_limit);
    double s_hi = sigma1(T_hi);
    int guard = 0;
    while (s_hi > 0 && ++guard < 200) {
        double next = std::min(T_hi * 1.6, hi_limit);
        if (next == T_hi) break;
        T_hi = next;
        s_hi = sigma1(T_hi);
    }
    if (s_hi > 0)
        throw AssumptionError(
            "find_t_star_by_root: sigma_1 never becomes negative below the threshold "
            "(inconsistent with the Robin gap estimate)");

    // shrink until sigma_1 is positive
    double T_lo = T_hi;
    double s_lo = s_hi;
    guard = 0;
    while (s_lo <= 0 && ++guard < 400) {
        T_lo /= 1.6;
        s_lo = sigma1(T_lo);
    }
    if (s_lo <= 0)
        throw AssumptionError("find_t_star_by_root: no sign change located for sigma_1");
    return find_root(sigma1, T_lo, T_hi, 1e-12);
}

AlphaBeta alpha_beta(const Spectrum& dirichlet, double gamma_1, double T) {
    const int l = dirichlet.negative_count;
    if (static_cast<int>(dirichlet.eigenvalues.size()) < l + 1)
        throw DomainError("alpha_beta: spectrum needs at least l+1 eigenvalues");
    if (!(T > 0)) throw DomainError("alpha_beta: T must be positive");
    const double gamma_D1 = dirichlet.eigenvalues[0];
    const double gamma_next = dirichlet.eigenvalues[l];  // gamma_{D,l+1}
    const double shift = 4.0 * M_PI * M_PI / (T * T);

    AlphaBeta ab;
    double a2 = gamma_D1 + shift;
    ab.alpha = std::min(gamma_next, a2);
    ab.alpha_branch = (gamma_next <= a2) ? MinBranch::NextDirichlet : MinBranch::ShiftedFirst;
    double b2 = gamma_1 + shift;
    ab.beta = std::min(gamma_next, b2);
    ab.beta_branch = (gamma_next <= b2) ? MinBranch::NextDirichlet : MinBranch::ShiftedFirst;
    return ab;
}

double jt_quadratic(const std::vector<double>& v_coeffs, double T,
                    const std::vector<double>& sigma_ks) {
    (void)T;
    if (v_coeffs.size() > sigma_ks.size())
        throw DomainError("jt_quadratic: missing sigma_k for a mode present in v");
    double j = 0.0;
    for (size_t i = 0; i < v_coeffs.size(); ++i)
        j += 0.5 * sigma_ks[i] * v_coeffs[i] * v_coeffs[i];
    return j;
}

TransversalityReport transversality(const RadialProfile& profile, const NonlinearitySpec& f,
                                    const BallGeometry& geom, double c, double T_star,
                                    const std::vector<double>& psi1,
                                    const UniformGrid1D& psi_grid, double gamma_1,
                                    const ModeConfig& cfg) {
    if (std::abs(psi1.back() - 1.0) > 1e-8)
        throw DomainError("transversality: psi1 must be boundary normalized (psi1(1) = 1)");

    TransversalityReport rep;
    // ||psi1||^2 in the radial weight
    {
        std::vector<double> ps2(psi1.size()), w(psi1.size());
        for (size_t i = 0; i < psi1.size(); ++i) {
            ps2[i] = psi1[i] * psi1[i];
            w[i] = std::pow(psi_grid.node(static_cast<int>(i)), geom.n - 1);
        }
        rep.psi1_norm2 = integrate_weighted(ps2, w, psi_grid);
    }
    rep.reference_value = -(4.0 * M_PI * M_PI / (T_star * T_star * T_star)) * rep.psi1_norm2;

    // fourth-order centered stencil with a small step: sigma_1 can have large
    // curvature when the invertibility threshold sits close to T*
    const double dT = 1e-4 * T_star;
    auto half_sigma1 = [&](double T) {
        return 0.5 * (mode_solution(profile, f, geom, 1, T, cfg).flux + c);
    };
    rep.fd_value = (8.0 * (half_sigma1(T_star + dT) - half_sigma1(T_star - dT)) -
                    (half_sigma1(T_star + 2 * dT) - half_sigma1(T_star - 2 * dT))) /
                   (12.0 * dT);
    rep.rel_err = std::abs(rep.fd_value - rep.reference_value) /
                  std::max(std::abs(rep.reference_value), 1e-300);

    const double ball_norm2 = geom.omega_n * rep.psi1_norm2;
    rep.consistency_residual =
        0.5 * T_star * gamma_1 * ball_norm2 + 2.0 * M_PI * M_PI / T_star * ball_norm2;

    if (std::abs(rep.fd_value) <= 1e-8 * std::max(1.0, std::abs(rep.reference_value)))
        throw AssumptionError("transversality: derivative of the flux form vanishes; "
                              "bifurcation not certified");
    return rep;
}

double qt_separable(const RadialProfile& profile, const NonlinearitySpec& f,
                    const BallGeometry& geom, double c, const std::vector<double>& v_coeffs,
                    double T, const ModeConfig& cfg) {
    const int K = static_cast<int>(v_coeffs.size());
    if (K == 0) return 0.0;

    auto q_level = [&](int cells) {
        ModeLevel lv = make_level(profile, f, geom, cells);
        const int N = cells;
        UniformGrid1D grid(N + 1, 0.0, 1.0);
        std::vector<std::vector<double>> rho(K), drho(K);
        for (int k = 1; k <= K; ++k) {
            double omega = kTwoPi * k / T;
            rho[k - 1] = mode_solve_level(lv, omega * omega).first;
            drho[k - 1] = derivative_fourth_order(rho[k - 1], grid.spacing());
        }
        // tensor quadrature: Simpson radially, equal-weight trapezoid in t
        const int Mt = 16 * std::max(K, 2);
        std::vector<double> radial(N + 1), weight(N + 1), boundary_term(Mt);
        for (int i = 0; i <= N; ++i) weight[i] = std::pow(grid.node(i), geom.n - 1);
        double bulk = 0.0;
        for (int m = 0; m < Mt; ++m) {
            double t = T * m / Mt;
            for (int i = 0; i <= N; ++i) {
                double psi = 0, psir = 0, psit = 0;
                for (int k = 1; k <= K; ++k) {
                    double ck = std::cos(kTwoPi * k * t / T);
                    double sk = std::sin(kTwoPi * k * t / T);
                    psi += v_coeffs[k - 1] * rho[k - 1][i] * ck;
                    psir += v_coeffs[k - 1] * drho[k - 1][i] * ck;
                    psit += -v_coeffs[k - 1] * rho[k - 1][i] * kTwoPi * k / T * sk;
                }
                double fp = lv.q[i];
                radial[i] = psir * psir + psit * psit - fp * psi * psi;
            }
            bulk += integrate_weighted(radial, weight, grid);
            double psi_b = 0;
            for (int k = 1; k <= K; ++k)
                psi_b += v_coeffs[k - 1] * std::cos(kTwoPi * k * t / T);
            boundary_term[m] = psi_b * psi_b;
        }
        bulk *= T / Mt;
        double bnd = 0;
        for (double x : boundary_term) bnd += x;
        bnd *= T / Mt;
        return geom.omega_n * (bulk + c * bnd);
    };

    double qc = q_level(cfg.base_cells);
    double qf = q_level(2 * cfg.base_cells);
    return (4.0 * qf - qc) / 3.0;
}

void export_sigma_csv(const SigmaCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.precision(17);
    out << "T,sigma,k_min\n";
    for (size_t i = 0; i < curve.T_values.size(); ++i)
        out << curve.T_values[i] << ',' << curve.sigma_values[i] << ','
            << curve.minimizing_k[i] << '\n';
}

}  // namespace ovd
