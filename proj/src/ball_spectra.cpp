#include "ovd/ball_spectra.hpp"

#include <cmath>
#include <fstream>

namespace ovd {

RadialFv make_radial_fv(int n_cells, int dim) {
    if (n_cells < 4) throw DomainError("make_radial_fv: grid too coarse");
    RadialFv fv;
    fv.n_cells = n_cells;
    fv.h = 1.0 / n_cells;
    fv.flux_w.resize(n_cells);
    fv.mass.resize(n_cells + 1);
    auto rpow = [dim](double r) { return std::pow(r, dim - 1); };
    for (int i = 0; i < n_cells; ++i) fv.flux_w[i] = rpow((i + 0.5) * fv.h);
    auto cell = [&](double rlo, double rhi) {
        return (std::pow(rhi, dim) - std::pow(rlo, dim)) / dim;
    };
    fv.mass[0] = cell(0.0, 0.5 * fv.h);
    for (int i = 1; i < n_cells; ++i) fv.mass[i] = cell((i - 0.5) * fv.h, (i + 0.5) * fv.h);
    fv.mass[n_cells] = cell(1.0 - 0.5 * fv.h, 1.0);
    return fv;
}

std::vector<double> sample_potential(const RadialProfile& profile, const NonlinearitySpec& f,
                                     int n_cells) {
    std::vector<double> q(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) {
        double r = static_cast<double>(i) / n_cells;
        q[i] = f.eval_deriv_extended(eval_profile(profile, r).first);
    }
    return q;
}

namespace {

// Symmetric standard-form matrix D^{-1/2} A D^{-1/2} for the pencil
// A psi = gamma M psi, together with the masses needed to map vectors back.
struct DiscreteOperator {
    SymTridiag matrix;
    std::vector<double> mass;  // of the retained unknowns
};

DiscreteOperator assemble(const RadialFv& fv, const std::vector<double>& q, BoundaryKind bc,
                          double robin_c) {
    const int N = fv.n_cells;
    const int unknowns = (bc == BoundaryKind::Dirichlet) ? N : N + 1;
    std::vector<double> adiag(unknowns), aoff(unknowns - 1);
    adiag[0] = fv.flux_w[0] / fv.h - fv.mass[0] * q[0];
    for (int i = 1; i < N; ++i)
        adiag[i] = (fv.flux_w[i - 1] + fv.flux_w[i]) / fv.h - fv.mass[i] * q[i];
    for (int i = 0; i + 1 < unknowns; ++i) aoff[i] = -fv.flux_w[i] / fv.h;
    if (bc == BoundaryKind::Robin)
        adiag[N] = fv.flux_w[N - 1] / fv.h + robin_c - fv.mass[N] * q[N];

    DiscreteOperator op;
    op.mass.assign(fv.mass.begin(), fv.mass.begin() + unknowns);
    op.matrix.diag.resize(unknowns);
    op.matrix.off.resize(unknowns - 1);
    for (int i = 0; i < unknowns; ++i) op.matrix.diag[i] = adiag[i] / op.mass[i];
    for (int i = 0; i + 1 < unknowns; ++i)
        op.matrix.off[i] = aoff[i] / std::sqrt(op.mass[i] * op.mass[i + 1]);
    return op;
}

Spectrum compute_spectrum(const RadialProfile& profile, const NonlinearitySpec& f,
                          const BallGeometry& geom, BoundaryKind bc, double robin_c, int k,
                          Normalization normalization, const SpectrumConfig& cfg) {
    if (k < 1) throw DomainError("spectrum: k must be positive");
    if (cfg.base_nodes < 9) throw DomainError("spectrum: ladder base too coarse");

    const int ladder[3] = {cfg.base_nodes - 1, 2 * (cfg.base_nodes - 1), 4 * (cfg.base_nodes - 1)};
    std::vector<std::vector<double>> evals(3);
    std::vector<EigenPair> finest_pairs;
    std::vector<double> finest_mass;
    int negative_count = 0;

    for (int level = 0; level < 3; ++level) {
        const int N = ladder[level];
        RadialFv fv = make_radial_fv(N, geom.n);
        std::vector<double> q = sample_potential(profile, f, N);
        DiscreteOperator op = assemble(fv, q, bc, robin_c);
        std::vector<EigenPair> pairs = sym_tridiag_eigs(op.matrix, k);
        evals[level].resize(k);
        for (int j = 0; j < k; ++j) evals[level][j] = pairs[j].value;
        if (level == 2) {
            negative_count = sturm_count_below(op.matrix, 0.0);
            finest_pairs = std::move(pairs);
            finest_mass = std::move(op.mass);
        }
    }

    Spectrum s;
    s.bc = bc;
    s.robin_c = robin_c;
    s.normalization = normalization;
    s.negative_count = negative_count;
    s.grid = UniformGrid1D(ladder[2] + 1, 0.0, 1.0);
    s.eigenvalues.resize(k);
    s.err_estimates.resize(k);
    for (int j = 0; j < k; ++j) {
        double e_mid = (4.0 * evals[1][j] - evals[0][j]) / 3.0;
        double e_fin = (4.0 * evals[2][j] - evals[1][j]) / 3.0;
        s.eigenvalues[j] = e_fin;
        s.err_estimates[j] = std::abs(e_fin - e_mid);
    }
    for (int j = 1; j < k; ++j)
        if (!(s.eigenvalues[j] > s.eigenvalues[j - 1]))
            throw ConvergenceError("spectrum: eigenvalues not strictly ascending at j = " +
                                   std::to_string(j));

    // map standard-form vectors back to nodal values and normalize
    const int N = ladder[2];
    std::vector<double> weight(N + 1);
    for (int i = 0; i <= N; ++i) weight[i] = std::pow(s.grid.node(i), geom.n - 1);
    s.eigenfunctions.resize(k);
    for (int j = 0; j < k; ++j) {
        std::vector<double> psi(N + 1, 0.0);
        const std::vector<double>& x = finest_pairs[j].vec;
        const int unknowns = static_cast<int>(x.size());
        for (int i = 0; i < unknowns; ++i) psi[i] = x[i] / std::sqrt(finest_mass[i]);
        // Dirichlet: boundary value stays 0

        if (normalization == Normalization::UnitL2Ball) {
            auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
                std::vector<double> prod(N + 1);
                for (int i = 0; i <= N; ++i) prod[i] = u[i] * v[i];
                return geom.omega_n * integrate_weighted(prod, weight, s.grid);
            };
            // orthonormalize in the reported inner product; the vectors are
            // already orthogonal to O(h^2), so the Rayleigh quotients move
            // only at second order in that correction
            for (int jj = 0; jj < j; ++jj) {
                const auto& prev = s.eigenfunctions[jj];
                double c = dot(psi, prev);
                for (int i = 0; i <= N; ++i) psi[i] -= c * prev[i];
            }
            double inv = 1.0 / std::sqrt(dot(psi, psi));
            for (double& v : psi) v *= inv;
        } else {
            if (bc != BoundaryKind::Robin)
                throw DomainError("UnitBoundaryValue normalization requires a Robin spectrum");
            if (std::abs(psi[N]) < 1e-12)
                throw ConvergenceError("robin eigenfunction vanishes at the boundary");
            double inv = 1.0 / psi[N];
            for (double& v : psi) v *= inv;
        }
        // deterministic sign for the L2 normalization
        if (normalization == Normalization::UnitL2Ball) {
            double anchor = (bc == BoundaryKind::Robin) ? psi[N] : psi[0];
            if (anchor < 0)
                for (double& v : psi) v = -v;
        }
        s.eigenfunctions[j] = std::move(psi);
    }
    return s;
}

}  // namespace

Spectrum dirichlet_spectrum(const RadialProfile& profile, const NonlinearitySpec& f,
                            const BallGeometry& geom, int k, const SpectrumConfig& cfg) {
    return compute_spectrum(profile, f, geom, BoundaryKind::Dirichlet, 0.0, k,
                            Normalization::UnitL2Ball, cfg);
}

Spectrum robin_spectrum(const RadialProfile& profile, const NonlinearitySpec& f,
                        const BallGeometry& geom, double c, int k, Normalization normalization,
                        const SpectrumConfig& cfg) {
    return compute_spectrum(profile, f, geom, BoundaryKind::Robin, c, k, normalization, cfg);
}

double quadratic_form_Q(const RadialProfile& profile, const NonlinearitySpec& f,
                        const BallGeometry& geom, double c, const UniformGrid1D& grid,
                        const std::vector<double>& psi, bool include_boundary) {
    const int n = grid.n_points;
    if (static_cast<int>(psi.size()) != n)
        throw DomainError("quadratic_form_Q: psi length mismatch");
    std::vector<double> dpsi = derivative_fourth_order(psi, grid.spacing());
    std::vector<double> integrand(n), weight(n);
    for (int i = 0; i < n; ++i) {
        double r = grid.node(i);
        double fp = f.eval_deriv_extended(eval_profile(profile, r).first);
        integrand[i] = dpsi[i] * dpsi[i] - fp * psi[i] * psi[i];
        weight[i] = std::pow(r, geom.n - 1);
    }
    double q = geom.omega_n * integrate_weighted(integrand, weight, grid);
    if (include_boundary) q += c * geom.omega_n * psi[n - 1] * psi[n - 1];
    return q;
}

AssumptionReport check_assumptions(const Spectrum& dirichlet, double tol) {
    if (tol <= 0) throw DomainError("check_assumptions: tol must be positive");
    if (static_cast<int>(dirichlet.eigenvalues.size()) <= dirichlet.negative_count)
        throw DomainError("check_assumptions: spectrum too short (k <= negative count)");
    AssumptionReport rep;
    rep.tol = tol;
    rep.negative_count = dirichlet.negative_count;
    rep.min_abs_eigenvalue = HUGE_VAL;
    rep.max_err_estimate = 0.0;
    size_t argmin = 0;
    for (size_t j = 0; j < dirichlet.eigenvalues.size(); ++j) {
        double a = std::abs(dirichlet.eigenvalues[j]);
        if (a < rep.min_abs_eigenvalue) {
            rep.min_abs_eigenvalue = a;
            argmin = j;
        }
        rep.max_err_estimate = std::max(rep.max_err_estimate, dirichlet.err_estimates[j]);
    }
    // only the eigenvalue closest to zero decides degeneracy, so only its
    // extrapolation error gates the verdict
    if (dirichlet.err_estimates[argmin] > tol / 10.0) {
        rep.status = AssumptionStatus::Inconclusive;
        rep.message = "extrapolation error exceeds tol/10; refine the spectral ladder";
    } else if (rep.min_abs_eigenvalue > tol) {
        rep.status = AssumptionStatus::Pass;
        rep.message = "radial Dirichlet linearization nondegenerate";
    } else {
        rep.status = AssumptionStatus::Fail;
        rep.message = "assumption 2 unverified: eigenvalue within " + std::to_string(tol) +
                      " of zero";
    }
    return rep;
}

double weighted_tail_integral(const RadialProfile& profile, const BallGeometry& geom) {
    if (geom.n < 2) throw DomainError("weighted_tail_integral: defined for n >= 2");
    const int n = profile.grid.n_points;
    std::vector<double> vals(n), ones(n, 1.0);
    vals[0] = 0.0;  // r^{n-3} phi'^2 -> 0 at the axis since phi' ~ -f(a) r / n
    for (int i = 1; i < n; ++i) {
        double r = profile.grid.node(i);
        double d = profile.derivative_values[i];
        vals[i] = std::pow(r, geom.n - 3) * d * d;
    }
    return integrate_weighted(vals, ones, profile.grid);
}

void export_spectrum_csv(const Spectrum& spectrum, const std::string& eigenvalue_path,
                         const std::string& eigenfunction_prefix) {
    std::ofstream out(eigenvalue_path);
    if (!out) throw Error("cannot open " + eigenvalue_path + " for writing");
    out.precision(17);
    out << "index,eigenvalue,err_estimate\n";
    for (size_t j = 0; j < spectrum.eigenvalues.size(); ++j)
        out << j + 1 << ',' << spectrum.eigenvalues[j] << ',' << spectrum.err_estimates[j]
            << '\n';
    for (size_t j = 0; j < spectrum.eigenfunctions.size(); ++j) {
        std::ofstream ef(eigenfunction_prefix + std::to_string(j + 1) + ".csv");
        if (!ef) throw Error("cannot open eigenfunction file for writing");
        ef.precision(17);
        ef << "r,psi\n";
        for (int i = 0; i < spectrum.grid.n_points; ++i)
            ef << spectrum.grid.node(i) << ',' << spectrum.eigenfunctions[j][i] << '\n';
    }
}

}  // namespace ovd
