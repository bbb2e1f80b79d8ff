#include "ovd/dtn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace ovd {

namespace {

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

constexpr double kTwoPi = 2.0 * M_PI;

// cubic Lagrange interpolation on a uniform source grid
double interp_cubic(const UniformGrid1D& g, const std::vector<double>& y, double x) {
    const int n = g.n_points;
    const double h = g.spacing();
    int i = static_cast<int>((x - g.a) / h);
    i = std::max(1, std::min(i, n - 3));  // stencil i-1 .. i+2
    double xi = g.node(i);
    double t = (x - xi) / h;
    double ym1 = y[i - 1], y0 = y[i], y1 = y[i + 1], y2 = y[i + 2];
    return ym1 * (-t * (t - 1) * (t - 2) / 6.0) + y0 * ((t * t - 1) * (t - 2) / 2.0) +
           y1 * (-t * (t + 1) * (t - 2) / 2.0) + y2 * (t * (t * t - 1) / 6.0);
}

}  // namespace

double EvenFourierProfile::eval(double t) const {
    double s = 0;
    for (size_t k = 0; k < coefficients.size(); ++k)
        s += coefficients[k] * std::cos(kTwoPi * (k + 1) * t);
    return s;
}

double EvenFourierProfile::deriv(double t) const {
    double s = 0;
    for (size_t k = 0; k < coefficients.size(); ++k) {
        double w = kTwoPi * (k + 1);
        s -= coefficients[k] * w * std::sin(w * t);
    }
    return s;
}

double EvenFourierProfile::second_deriv(double t) const {
    double s = 0;
    for (size_t k = 0; k < coefficients.size(); ++k) {
        double w = kTwoPi * (k + 1);
        s -= coefficients[k] * w * w * std::cos(w * t);
    }
    return s;
}

double EvenFourierProfile::sup_bound() const {
    double s = 0;
    for (double c : coefficients) s += std::abs(c);
    return s;
}

bool EvenFourierProfile::is_zero() const {
    for (double c : coefficients)
        if (c != 0.0) return false;
    return true;
}

struct CylinderSolver::Coeffs {
    double T = 0.0;
    double lambda = 0.0;
    EvenFourierProfile v;
    std::vector<double> R, Rp, Rpp;          // boundary radius and derivatives at s_m
    std::vector<double> a, b, mc;            // (i-1)*P + m tables for i = 1..N-1
    std::vector<double> axis;                // n / R_m^2
    std::vector<std::vector<double>> bnd;    // boundary row values (zeros unless lifted)
};

CylinderSolver::CylinderSolver(const RadialProfile& profile, const NonlinearitySpec& f,
                               const BallGeometry& geom, CylinderSolverConfig cfg)
    : profile_(&profile), f_(&f), geom_(geom), cfg_(cfg) {
    if (cfg_.radial_cells < 8) throw DomainError("CylinderSolver: radial grid too coarse");
    if (cfg_.modes < 2) throw DomainError("CylinderSolver: need at least 2 modes");
    c_ = profile.robin_c;
    d_at_1_ = profile.d_at_1;

    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const double h = 1.0 / N;
    phi1_.resize(N + 1);
    q_.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        phi1_[i] = eval_profile(profile, rho_node(i)).first;
        q_[i] = f.eval_deriv_extended(phi1_[i]);
        amplitude_scale_ = std::max(amplitude_scale_, std::abs(phi1_[i]));
    }
    // Defect of the straight finite-difference operator on the sampled ground
    // profile; subtracting it makes the unperturbed cylinder an exact
    // discrete solution.
    defect_.resize(N);
    defect_[0] = geom_.n * 2.0 * (phi1_[1] - phi1_[0]) / (h * h) + f.eval_extended(phi1_[0]);
    for (int i = 1; i < N; ++i) {
        double rho = rho_node(i);
        // second difference as a sum of exact nearby differences; this keeps
        // the cancellation noise of the residual far below the Newton target
        double d2 = ((phi1_[i + 1] - phi1_[i]) + (phi1_[i - 1] - phi1_[i])) / (h * h);
        defect_[i] = d2 + (geom_.n - 1) / rho * (phi1_[i + 1] - phi1_[i - 1]) / (2 * h) +
                     f.eval_extended(phi1_[i]);
    }

    // collocation matrices on s_m = m/(2M), m = 0..M
    const int M = cfg_.modes;
    std::vector<double> cosmat(P * P), sinmat(P * P);
    for (int m = 0; m < P; ++m)
        for (int j = 0; j < P; ++j) {
            cosmat[m * P + j] = std::cos(M_PI * j * m / M);
            sinmat[m * P + j] = std::sin(M_PI * j * m / M);
        }
    cosmat_ = cosmat;
    DenseMatrix cm(P);
    for (int i = 0; i < P * P; ++i) cm.a[i] = cosmat[i];
    cos_lu_ = lu_factor(std::move(cm));

    // explicit inverse for building the differentiation matrices
    std::vector<std::vector<double>> inv_cols(P, std::vector<double>(P, 0.0));
    for (int j = 0; j < P; ++j) {
        inv_cols[j][j] = 1.0;
        cos_lu_.solve(inv_cols[j]);
    }
    d1_.assign(P * P, 0.0);
    d2_.assign(P * P, 0.0);
    for (int m = 0; m < P; ++m)
        for (int c = 0; c < P; ++c) {
            double s1 = 0, s2 = 0;
            for (int j = 0; j < P; ++j) {
                double w = kTwoPi * j;
                s1 += sinmat[m * P + j] * (-w) * inv_cols[c][j];
                s2 += cosmat[m * P + j] * (-w * w) * inv_cols[c][j];
            }
            d1_[m * P + c] = s1;
            d2_[m * P + c] = s2;
        }
}

CylinderSolver::Coeffs CylinderSolver::make_coeffs(const EvenFourierProfile& v, double T) const {
    if (!(T > 0)) throw DomainError("CylinderSolver: T must be positive");
    if (v.order() > cfg_.modes)
        throw DomainError("CylinderSolver: profile order exceeds collocation modes");
    if (v.sup_bound() >= 1.0)
        throw DomainError("CylinderSolver: ||v||_inf bound >= 1, domain not valid");

    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    Coeffs co;
    co.T = T;
    co.lambda = 1.0 / (T * T);
    co.v = v;
    co.R.resize(P);
    co.Rp.resize(P);
    co.Rpp.resize(P);
    for (int m = 0; m < P; ++m) {
        double s = s_node(m);
        co.R[m] = 1.0 + v.eval(s);
        co.Rp[m] = v.deriv(s);
        co.Rpp[m] = v.second_deriv(s);
    }
    co.axis.resize(P);
    for (int m = 0; m < P; ++m) co.axis[m] = geom_.n / (co.R[m] * co.R[m]);
    co.a.resize(static_cast<size_t>(N - 1) * P);
    co.b.resize(static_cast<size_t>(N - 1) * P);
    co.mc.resize(static_cast<size_t>(N - 1) * P);
    for (int i = 1; i < N; ++i) {
        double rho = rho_node(i);
        for (int m = 0; m < P; ++m) {
            double R = co.R[m], Rp = co.Rp[m], Rpp = co.Rpp[m];
            double R2 = R * R;
            size_t idx = static_cast<size_t>(i - 1) * P + m;
            co.a[idx] = (1.0 + co.lambda * rho * rho * Rp * Rp) / R2;
            co.b[idx] = (geom_.n - 1) / (rho * R2) +
                        co.lambda * rho * (2.0 * Rp * Rp - Rpp * R) / R2;
            co.mc[idx] = -2.0 * co.lambda * rho * Rp / R;
        }
    }
    co.bnd.assign(1, std::vector<double>(P, 0.0));  // homogeneous boundary row
    return co;
}

std::vector<std::vector<double>> CylinderSolver::residual(
    const std::vector<std::vector<double>>& x, const Coeffs& co) const {
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const double h = 1.0 / N;
    const std::vector<double>& xb = co.bnd[0];

    std::vector<std::vector<double>> F(N, std::vector<double>(P, 0.0));
    std::vector<double> d1row(P);
    // t-derivative couplings row by row
    for (int i = 0; i < N; ++i) {
        const std::vector<double>& xi = x[i];
        std::vector<double>& Fi = F[i];
        for (int m = 0; m < P; ++m) {
            double s2 = 0;
            const double* d2row = &d2_[static_cast<size_t>(m) * P];
            for (int mm = 0; mm < P; ++mm) s2 += d2row[mm] * xi[mm];
            Fi[m] = co.lambda * s2;
        }
    }
    // radial and mixed parts
    for (int m = 0; m < P; ++m)
        F[0][m] += co.axis[m] * 2.0 * (x[1][m] - x[0][m]) / (h * h) +
                   f_->eval_extended(x[0][m]) - defect_[0];
    auto d1_apply = [&](const std::vector<double>& vals, std::vector<double>& out) {
        for (int m = 0; m < P; ++m) {
            double s = 0;
            const double* row = &d1_[static_cast<size_t>(m) * P];
            for (int mm = 0; mm < P; ++mm) s += row[mm] * vals[mm];
            out[m] = s;
        }
    };
    std::vector<double> d1_up(P), d1_dn(P);
    for (int i = 1; i < N; ++i) {
        const std::vector<double>& up = (i + 1 == N) ? xb : x[i + 1];
        const std::vector<double>& dn = x[i - 1];
        const std::vector<double>& xi = x[i];
        d1_apply(up, d1_up);
        d1_apply(dn, d1_dn);
        for (int m = 0; m < P; ++m) {
            size_t idx = static_cast<size_t>(i - 1) * P + m;
            F[i][m] += co.a[idx] * ((up[m] - xi[m]) + (dn[m] - xi[m])) / (h * h) +
                       co.b[idx] * (up[m] - dn[m]) / (2 * h) +
                       co.mc[idx] * (d1_up[m] - d1_dn[m]) / (2 * h) +
                       f_->eval_extended(xi[m]) - defect_[i];
        }
    }
    return F;
}

double CylinderSolver::max_abs(const std::vector<std::vector<double>>& r) const {
    double m = 0;
    for (const auto& row : r)
        for (double x : row) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> CylinderSolver::to_cosine_coefficients(const std::vector<double>& nodal) const {
    std::vector<double> c = nodal;
    cos_lu_.solve(c);
    return c;  // c[j] multiplies cos(2 pi j s)
}

CylinderField CylinderSolver::solve(const EvenFourierProfile& v, double T,
                                    const CylinderField* warm) const {
    Coeffs co = make_coeffs(v, T);
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const double h = 1.0 / N;
    // the reachable max-norm residual scales with the solution amplitude
    // (backward error of the linearized solves is eps * ||J|| * ||x||)
    const double tol = cfg_.newton_tol * std::max(1.0, amplitude_scale_);

    std::vector<std::vector<double>> x(N, std::vector<double>(P));
    if (warm) {
        if (warm->n_cells != N || warm->modes != cfg_.modes)
            throw DomainError("CylinderSolver: warm start has mismatched grid");
        for (int i = 0; i < N; ++i) x[i] = warm->values[i];
    } else {
        for (int i = 0; i < N; ++i)
            for (int m = 0; m < P; ++m) x[i][m] = phi1_[i];
    }

    std::vector<std::vector<double>> F = residual(x, co);
    double res = max_abs(F);
    int iter = 0;
    while (res > tol) {
        if (++iter > cfg_.newton_max_iter)
            throw ConvergenceError("CylinderSolver: Newton stalled, residual " + sci(res));
        // assemble Jacobian blocks
        std::vector<DenseMatrix> sub(N), diag(N), sup(N);
        std::vector<std::vector<double>> rhs(N, std::vector<double>(P));
        for (int i = 0; i < N; ++i)
            for (int m = 0; m < P; ++m) rhs[i][m] = -F[i][m];
        for (int i = 0; i < N; ++i) {
            diag[i] = DenseMatrix(P);
            if (i > 0) sub[i] = DenseMatrix(P);
            if (i + 1 < N) sup[i] = DenseMatrix(P);
            for (int m = 0; m < P; ++m) {
                for (int mm = 0; mm < P; ++mm)
                    diag[i].at(m, mm) = co.lambda * d2_[static_cast<size_t>(m) * P + mm];
                diag[i].at(m, m) += f_->eval_deriv_extended(x[i][m]);
            }
            if (i == 0) {
                for (int m = 0; m < P; ++m) {
                    diag[0].at(m, m) += -2.0 * co.axis[m] / (h * h);
                    sup[0].at(m, m) += 2.0 * co.axis[m] / (h * h);
                }
            } else {
                for (int m = 0; m < P; ++m) {
                    size_t idx = static_cast<size_t>(i - 1) * P + m;
                    diag[i].at(m, m) += -2.0 * co.a[idx] / (h * h);
                    double cup = co.a[idx] / (h * h) + co.b[idx] / (2 * h);
                    double cdn = co.a[idx] / (h * h) - co.b[idx] / (2 * h);
                    double cmix = co.mc[idx] / (2 * h);
                    if (i + 1 < N) {
                        sup[i].at(m, m) += cup;
                        for (int mm = 0; mm < P; ++mm)
                            sup[i].at(m, mm) += cmix * d1_[static_cast<size_t>(m) * P + mm];
                    }
                    sub[i].at(m, m) += cdn;
                    for (int mm = 0; mm < P; ++mm)
                        sub[i].at(m, mm) -= cmix * d1_[static_cast<size_t>(m) * P + mm];
                }
            }
        }
        try {
            solve_block_tridiag(sub, diag, sup, rhs);
        } catch (const ConditioningError&) {
            throw ConditioningError(
                "CylinderSolver: linearized solve singular (degenerate period?)");
        }
        // damped update
        double alpha = 1.0;
        bool accepted = false;
        std::vector<std::vector<double>> xt(N, std::vector<double>(P));
        for (int halvings = 0; halvings < 30 && !accepted; ++halvings) {
            for (int i = 0; i < N; ++i)
                for (int m = 0; m < P; ++m) xt[i][m] = x[i][m] + alpha * rhs[i][m];
            std::vector<std::vector<double>> Ft = residual(xt, co);
            double new_res = max_abs(Ft);
            if (new_res < res) {
                x.swap(xt);
                F = std::move(Ft);
                res = new_res;
                accepted = true;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("CylinderSolver: line search failed, residual " + sci(res));
    }

    // positivity of the converged interior state
    for (int i = 0; i < N; ++i)
        for (int m = 0; m < P; ++m)
            if (!(x[i][m] > 0.0))
                throw PositivityError("CylinderSolver: converged field not positive at rho = " +
                                      std::to_string(rho_node(i)));

    CylinderField field;
    field.n_cells = N;
    field.modes = cfg_.modes;
    field.T = T;
    field.v = v;
    field.values = std::move(x);
    field.values.push_back(std::vector<double>(P, 0.0));  // boundary row
    field.newton_residual = res;
    return field;
}

DtNResult CylinderSolver::g_operator(const CylinderField& field) const {
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const int M = cfg_.modes;
    const double h = 1.0 / N;
    if (field.n_cells != N || field.modes != M)
        throw DomainError("g_operator: field grid mismatch");
    if (field.newton_residual > cfg_.newton_tol * std::max(1.0, amplitude_scale_))
        throw DomainError("g_operator: field not converged");

    const double lambda = 1.0 / (field.T * field.T);
    std::vector<double> flux(P), surf(P);
    for (int m = 0; m < P; ++m) {
        double s = s_node(m);
        double R = 1.0 + field.v.eval(s);
        double Rp = field.v.deriv(s);
        double stretch = std::sqrt(1.0 + lambda * Rp * Rp);
        double dr = (25.0 * field.values[N][m] - 48.0 * field.values[N - 1][m] +
                     36.0 * field.values[N - 2][m] - 16.0 * field.values[N - 3][m] +
                     3.0 * field.values[N - 4][m]) /
                    (12.0 * h);
        flux[m] = dr / R * stretch;
        surf[m] = std::pow(R, geom_.n - 1) * stretch;
    }
    auto wt = [M](int m) { return (m == 0 || m == M) ? 0.5 / M : 1.0 / M; };
    double num = 0, den = 0;
    for (int m = 0; m < P; ++m) {
        num += wt(m) * flux[m] * surf[m];
        den += wt(m) * surf[m];
    }
    DtNResult out;
    out.mean_flux = num / den;
    out.residual = field.newton_residual;
    std::vector<double> dev(P);
    for (int m = 0; m < P; ++m) {
        dev[m] = flux[m] - out.mean_flux;
        out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(dev[m]));
    }
    std::vector<double> coef = to_cosine_coefficients(dev);
    out.g.coefficients.assign(coef.begin() + 1, coef.end());
    return out;
}

EvenFourierProfile CylinderSolver::ht_apply_2d(const EvenFourierProfile& w, double T,
                                               std::vector<std::vector<double>>* field_out) const {
    if (!(T > 0)) throw DomainError("ht_apply_2d: T must be positive");
    if (w.order() > cfg_.modes)
        throw DomainError("ht_apply_2d: profile order exceeds collocation modes");
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const double h = 1.0 / N;
    const double lambda = 1.0 / (T * T);

    std::vector<double> wvals(P);
    for (int m = 0; m < P; ++m) wvals[m] = w.eval(s_node(m));

    std::vector<DenseMatrix> sub(N), diag(N), sup(N);
    std::vector<std::vector<double>> rhs(N, std::vector<double>(P, 0.0));
    for (int i = 0; i < N; ++i) {
        diag[i] = DenseMatrix(P);
        if (i > 0) sub[i] = DenseMatrix(P);
        if (i + 1 < N) sup[i] = DenseMatrix(P);
        for (int m = 0; m < P; ++m) {
            for (int mm = 0; mm < P; ++mm)
                diag[i].at(m, mm) = lambda * d2_[static_cast<size_t>(m) * P + mm];
            diag[i].at(m, m) += q_[i];
        }
        if (i == 0) {
            for (int m = 0; m < P; ++m) {
                diag[0].at(m, m) += -2.0 * geom_.n / (h * h);
                sup[0].at(m, m) += 2.0 * geom_.n / (h * h);
            }
        } else {
            double rho = rho_node(i);
            double b = (geom_.n - 1) / rho;
            for (int m = 0; m < P; ++m) {
                diag[i].at(m, m) += -2.0 / (h * h);
                if (i + 1 < N)
                    sup[i].at(m, m) += 1.0 / (h * h) + b / (2 * h);
                else
                    rhs[i][m] -= (1.0 / (h * h) + b / (2 * h)) * wvals[m];
                sub[i].at(m, m) += 1.0 / (h * h) - b / (2 * h);
            }
        }
    }
    try {
        solve_block_tridiag(sub, diag, sup, rhs);
    } catch (const ConditioningError&) {
        throw ConditioningError("ht_apply_2d: straight-cylinder solve singular (T beyond "
                                "the invertibility threshold?)");
    }

    std::vector<double> hvals(P);
    for (int m = 0; m < P; ++m) {
        double dr = (25.0 * wvals[m] - 48.0 * rhs[N - 1][m] + 36.0 * rhs[N - 2][m] -
                     16.0 * rhs[N - 3][m] + 3.0 * rhs[N - 4][m]) /
                    (12.0 * h);
        hvals[m] = dr + c_ * wvals[m];
    }
    if (field_out) {
        field_out->assign(N + 1, std::vector<double>(P));
        for (int i = 0; i < N; ++i) (*field_out)[i] = rhs[i];
        (*field_out)[N] = wvals;
    }
    std::vector<double> coef = to_cosine_coefficients(hvals);
    EvenFourierProfile out;
    out.coefficients.assign(coef.begin() + 1, coef.end());
    return out;
}

FdLinearizationReport CylinderSolver::fd_linearization_check(
    const EvenFourierProfile& w, double T, const std::vector<double>& eps_list) const {
    EvenFourierProfile href = ht_apply_2d(w, T);
    FdLinearizationReport rep;
    rep.eps = eps_list;
    for (double eps : eps_list) {
        if (eps == 0.0) throw DomainError("fd_linearization_check: eps must be nonzero");
        EvenFourierProfile ve;
        ve.coefficients.resize(w.order());
        for (int k = 0; k < w.order(); ++k) ve.coefficients[k] = eps * w.coefficients[k];
        CylinderField field = solve(ve, T);
        DtNResult g = g_operator(field);
        double r = 0;
        for (size_t k = 0; k < g.g.coefficients.size(); ++k) {
            double hk = (k < href.coefficients.size()) ? href.coefficients[k] : 0.0;
            r = std::max(r, std::abs(g.g.coefficients[k] / eps + d_at_1_ * hk));
        }
        rep.r.push_back(r);
        rep.r_over_eps.push_back(r / std::abs(eps));
    }
    // least-squares slope of log r against log eps
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(rep.eps.size());
    for (int i = 0; i < n; ++i) {
        double lx = std::log(std::abs(rep.eps[i]));
        double ly = std::log(std::max(rep.r[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    rep.empirical_order = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-300);
    return rep;
}

OrthogonalityReport CylinderSolver::orthogonality_check(const EvenFourierProfile& v, double T,
                                                        const Spectrum& dirichlet) const {
    std::vector<std::vector<double>> psi;
    ht_apply_2d(v, T, &psi);
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const int M = cfg_.modes;
    const double h = 1.0 / N;
    auto wt = [M](int m) { return (m == 0 || m == M) ? 0.5 / M : 1.0 / M; };

    OrthogonalityReport rep;
    UniformGrid1D rho_grid(N + 1, 0.0, 1.0);
    std::vector<double> weight(N + 1), slice(N + 1);
    for (int i = 0; i <= N; ++i) weight[i] = std::pow(rho_node(i), geom_.n - 1);

    for (int j = 0; j < dirichlet.negative_count; ++j) {
        std::vector<double> zj(N + 1);
        for (int i = 0; i <= N; ++i)
            zj[i] = interp_cubic(dirichlet.grid, dirichlet.eigenfunctions[j], rho_node(i));
        double integral = 0;
        for (int m = 0; m < P; ++m) {
            for (int i = 0; i <= N; ++i) slice[i] = psi[i][m] * zj[i];
            integral += wt(m) * integrate_weighted(slice, weight, rho_grid);
        }
        integral *= T * geom_.omega_n;
        rep.volume_integrals.push_back(integral);
        rep.max_abs = std::max(rep.max_abs, std::abs(integral));
    }
    double flux_sum = 0;
    for (int m = 0; m < P; ++m) {
        double dr = (25.0 * psi[N][m] - 48.0 * psi[N - 1][m] + 36.0 * psi[N - 2][m] -
                     16.0 * psi[N - 3][m] + 3.0 * psi[N - 4][m]) /
                    (12.0 * h);
        flux_sum += wt(m) * dr;
    }
    rep.flux_integral = flux_sum * T * geom_.omega_n;
    rep.max_abs = std::max(rep.max_abs, std::abs(rep.flux_integral));
    return rep;
}

std::vector<std::vector<double>> CylinderSolver::apply_linear_part(
    const std::vector<std::vector<double>>& values_with_boundary, const EvenFourierProfile& v,
    double T) const {
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const double h = 1.0 / N;
    if (static_cast<int>(values_with_boundary.size()) != N + 1)
        throw DomainError("apply_linear_part: need N+1 rows");
    Coeffs co = make_coeffs(v, T);
    const std::vector<std::vector<double>>& x = values_with_boundary;

    std::vector<std::vector<double>> F(N, std::vector<double>(P, 0.0));
    std::vector<double> d1_up(P), d1_dn(P);
    auto d1_apply = [&](const std::vector<double>& vals, std::vector<double>& out) {
        for (int m = 0; m < P; ++m) {
            double s = 0;
            const double* row = &d1_[static_cast<size_t>(m) * P];
            for (int mm = 0; mm < P; ++mm) s += row[mm] * vals[mm];
            out[m] = s;
        }
    };
    for (int i = 0; i < N; ++i) {
        for (int m = 0; m < P; ++m) {
            double s2 = 0;
            const double* d2row = &d2_[static_cast<size_t>(m) * P];
            for (int mm = 0; mm < P; ++mm) s2 += d2row[mm] * x[i][mm];
            F[i][m] = co.lambda * s2;
        }
    }
    for (int m = 0; m < P; ++m)
        F[0][m] += co.axis[m] * 2.0 * (x[1][m] - x[0][m]) / (h * h);
    for (int i = 1; i < N; ++i) {
        d1_apply(x[i + 1], d1_up);
        d1_apply(x[i - 1], d1_dn);
        for (int m = 0; m < P; ++m) {
            size_t idx = static_cast<size_t>(i - 1) * P + m;
            F[i][m] += co.a[idx] * ((x[i + 1][m] - x[i][m]) + (x[i - 1][m] - x[i][m])) /
                           (h * h) +
                       co.b[idx] * (x[i + 1][m] - x[i - 1][m]) / (2 * h) +
                       co.mc[idx] * (d1_up[m] - d1_dn[m]) / (2 * h);
        }
    }
    return F;
}

double CylinderSolver::qt_from_2d_field(const EvenFourierProfile& v, double T) const {
    std::vector<std::vector<double>> psi;
    ht_apply_2d(v, T, &psi);
    const int N = cfg_.radial_cells;
    const int P = cfg_.modes + 1;
    const int M = cfg_.modes;
    const double lambda = 1.0 / (T * T);
    auto wt = [M](int m) { return (m == 0 || m == M) ? 0.5 / M : 1.0 / M; };

    UniformGrid1D rho_grid(N + 1, 0.0, 1.0);
    std::vector<double> weight(N + 1);
    for (int i = 0; i <= N; ++i) weight[i] = std::pow(rho_node(i), geom_.n - 1);

    // radial derivative per collocation column, spectral derivative per row
    std::vector<std::vector<double>> dpsi_rho(P, std::vector<double>(N + 1));
    {
        std::vector<double> col(N + 1);
        for (int m = 0; m < P; ++m) {
            for (int i = 0; i <= N; ++i) col[i] = psi[i][m];
            std::vector<double> d = derivative_fourth_order(col, rho_grid.spacing());
            dpsi_rho[m] = std::move(d);
        }
    }
    std::vector<std::vector<double>> dpsi_s(N + 1, std::vector<double>(P));
    for (int i = 0; i <= N; ++i)
        for (int m = 0; m < P; ++m) {
            double s = 0;
            const double* row = &d1_[static_cast<size_t>(m) * P];
            for (int mm = 0; mm < P; ++mm) s += row[mm] * psi[i][mm];
            dpsi_s[i][m] = s;
        }

    double bulk = 0;
    std::vector<double> radial(N + 1);
    for (int m = 0; m < P; ++m) {
        for (int i = 0; i <= N; ++i) {
            double pr = dpsi_rho[m][i];
            double ps = dpsi_s[i][m];
            double p = psi[i][m];
            radial[i] = pr * pr + lambda * ps * ps - q_[i] * p * p;
        }
        bulk += wt(m) * integrate_weighted(radial, weight, rho_grid);
    }
    double bnd = 0;
    for (int m = 0; m < P; ++m) bnd += wt(m) * psi[N][m] * psi[N][m];
    return T * geom_.omega_n * (bulk + c_ * bnd);
}

std::vector<double> ht_sigma_2d(const RadialProfile& profile, const NonlinearitySpec& f,
                                const BallGeometry& geom, double T, int k_max,
                                CylinderSolverConfig cfg) {
    if (k_max < 1 || k_max > cfg.modes)
        throw DomainError("ht_sigma_2d: k_max outside [1, modes]");
    CylinderSolverConfig fine_cfg = cfg;
    fine_cfg.radial_cells = 2 * cfg.radial_cells;
    CylinderSolver coarse(profile, f, geom, cfg);
    CylinderSolver fine(profile, f, geom, fine_cfg);
    std::vector<double> out(k_max);
    for (int k = 1; k <= k_max; ++k) {
        EvenFourierProfile w;
        w.coefficients.assign(k, 0.0);
        w.coefficients[k - 1] = 1.0;
        double s1 = coarse.ht_apply_2d(w, T).coefficients[k - 1];
        double s2 = fine.ht_apply_2d(w, T).coefficients[k - 1];
        out[k - 1] = (4.0 * s2 - s1) / 3.0;
    }
    return out;
}

void export_field_csv(const CylinderField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.precision(17);
    out << "r,t,u\n";
    const int N = field.n_cells;
    const int M = field.modes;
    for (int m = 0; m < 2 * M; ++m) {
        int mm = (m <= M) ? m : 2 * M - m;
        double t = field.T * m / (2.0 * M);
        for (int i = 0; i <= N; ++i)
            out << static_cast<double>(i) / N << ',' << t << ',' << field.values[i][mm] << '\n';
    }
}

void export_dtn_json(const DtNResult& result, const std::string& path) {
    nlohmann::ordered_json j;
    j["coefficients"] = result.g.coefficients;
    j["mean_flux"] = result.mean_flux;
    j["residual"] = result.residual;
    j["max_abs_deviation"] = result.max_abs_deviation;
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace ovd
