#include "ovd/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <mutex>
#include <thread>

namespace ovd {

UniformGrid1D::UniformGrid1D(int n, double a_, double b_) : n_points(n), a(a_), b(b_) {
    if (n < 2) throw DomainError("UniformGrid1D: need at least 2 points");
    if (!(a < b)) throw DomainError("UniformGrid1D: endpoints must satisfy a < b");
}

void SymTridiag::validate() const {
    if (diag.empty()) throw DomainError("SymTridiag: empty matrix");
    if (off.size() + 1 != diag.size())
        throw DomainError("SymTridiag: off-diagonal length must be size-1");
}

double SymTridiag::norm_inf() const {
    const int n = size();
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = std::abs(diag[i]);
        if (i > 0) s += std::abs(off[i - 1]);
        if (i < n - 1) s += std::abs(off[i]);
        nrm = std::max(nrm, s);
    }
    return nrm;
}

BallGeometry BallGeometry::make(int n) {
    if (n < 1) throw DomainError("BallGeometry: dimension must be >= 1");
    BallGeometry g;
    g.n = n;
    g.omega_n = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
    return g;
}

int sturm_count_below(const SymTridiag& m, double x) {
    m.validate();
    const int n = m.size();
    int count = 0;
    double q = m.diag[0] - x;
    if (q < 0) ++count;
    for (int i = 1; i < n; ++i) {
        double denom = q;
        if (denom == 0.0) denom = std::abs(m.off[i - 1]) * DBL_EPSILON + DBL_MIN;
        q = (m.diag[i] - x) - m.off[i - 1] * m.off[i - 1] / denom;
        if (q < 0) ++count;
    }
    return count;
}

namespace {

// Bisection for the j-th (0-based) eigenvalue inside [lo, hi] with
// count(lo) <= j < count(hi).
double bisect_eigenvalue(const SymTridiag& m, int j, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // interval collapsed to ulp
        if (sturm_count_below(m, mid) <= j)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TridiagLu {
    // partial-pivot LU of (T - shift I); du2 is the fill-in diagonal
    std::vector<double> dl, d, du, du2;
    std::vector<int> piv;
    double min_pivot = 0.0;
};

TridiagLu tridiag_shift_lu(const SymTridiag& m, double shift) {
    const int n = m.size();
    TridiagLu f;
    f.d.resize(n);
    f.dl.assign(std::max(n - 1, 0), 0.0);
    f.du.assign(std::max(n - 1, 0), 0.0);
    f.du2.assign(std::max(n - 2, 0), 0.0);
    f.piv.assign(n, 0);
    for (int i = 0; i < n; ++i) f.d[i] = m.diag[i] - shift;
    for (int i = 0; i + 1 < n; ++i) f.dl[i] = f.du[i] = m.off[i];

    const double tiny = DBL_MIN * 16;
    f.min_pivot = HUGE_VAL;
    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs(f.d[i]) >= std::abs(f.dl[i])) {
            f.piv[i] = 0;
            double piv = f.d[i];
            if (std::abs(piv) < tiny) piv = (piv < 0 ? -tiny : tiny), f.d[i] = piv;
            double mult = f.dl[i] / piv;
            f.dl[i] = mult;
            f.d[i + 1] -= mult * f.du[i];
            if (i + 2 < n) f.du2[i] = 0.0;
        } else {
            f.piv[i] = 1;  // swap rows i, i+1
            double mult = f.d[i] / f.dl[i];
            f.d[i] = f.dl[i];
            f.dl[i] = mult;
            double tmp = f.d[i + 1];
            f.d[i + 1] = f.du[i] - mult * tmp;
            f.du[i] = tmp;
            if (i + 2 < n) {
                f.du2[i] = f.du[i + 1];
                f.du[i + 1] = -mult * f.du[i + 1];
            }
        }
        f.min_pivot = std::min(f.min_pivot, std::abs(f.d[i]));
    }
    if (std::abs(f.d[n - 1]) < tiny) f.d[n - 1] = (f.d[n - 1] < 0 ? -tiny : tiny);
    f.min_pivot = std::min(f.min_pivot, std::abs(f.d[n - 1]));
    return f;
}

void tridiag_lu_solve(const TridiagLu& f, std::vector<double>& b) {
    const int n = static_cast<int>(f.d.size());
    for (int i = 0; i + 1 < n; ++i) {
        if (f.piv[i] == 1) std::swap(b[i], b[i + 1]);
        b[i + 1] -= f.dl[i] * b[i];
    }
    b[n - 1] /= f.d[n - 1];
    if (n >= 2) {
        b[n - 2] = (b[n - 2] - f.du[n - 2] * b[n - 1]) / f.d[n - 2];
        for (int i = n - 3; i >= 0; --i) {
            double s = b[i] - f.du[i] * b[i + 1];
            if (i + 2 < n) s -= f.du2[i] * b[i + 2];
            b[i] = s / f.d[i];
        }
    }
}

void tridiag_apply(const SymTridiag& m, const std::vector<double>& x, std::vector<double>& y) {
    const int n = m.size();
    for (int i = 0; i < n; ++i) {
        double s = m.diag[i] * x[i];
        if (i > 0) s += m.off[i - 1] * x[i - 1];
        if (i < n - 1) s += m.off[i] * x[i + 1];
        y[i] = s;
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::vector<EigenPair> sym_tridiag_eigs(const SymTridiag& m, int k,
                                        const std::vector<double>& weights) {
    m.validate();
    const int n = m.size();
    if (k < 1 || k > n) throw DomainError("sym_tridiag_eigs: k out of range");
    if (!weights.empty() && static_cast<int>(weights.size()) != n)
        throw DomainError("sym_tridiag_eigs: weight length mismatch");

    // Gerschgorin bounds
    double glo = HUGE_VAL, ghi = -HUGE_VAL;
    for (int i = 0; i < n; ++i) {
        double r = 0;
        if (i > 0) r += std::abs(m.off[i - 1]);
        if (i < n - 1) r += std::abs(m.off[i]);
        glo = std::min(glo, m.diag[i] - r);
        ghi = std::max(ghi, m.diag[i] + r);
    }
    const double scale = std::max({std::abs(glo), std::abs(ghi), 1.0});
    glo -= 1e-12 * scale;
    ghi += 1e-12 * scale;

    const double mnorm = std::max(m.norm_inf(), DBL_MIN);
    const double resid_tol = 1e-10 * mnorm;

    std::vector<EigenPair> out;
    out.reserve(k);
    for (int j = 0; j < k; ++j) {
        double lam = bisect_eigenvalue(m, j, glo, ghi);

        // inverse iteration, deterministic start, with Rayleigh polish
        std::vector<double> v(n), mv(n);
        for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin((j + 1.0) * (i + 1.0));
        double resid = HUGE_VAL;
        double shift = lam;
        for (int attempt = 0; attempt < 6 && resid > resid_tol; ++attempt) {
            TridiagLu f = tridiag_shift_lu(m, shift);
            for (int pass = 0; pass < 2; ++pass) {
                tridiag_lu_solve(f, v);
                double nv = norm2(v);
                if (nv == 0.0 || !std::isfinite(nv)) {
                    for (int i = 0; i < n; ++i) v[i] = (i == j % n) ? 1.0 : 0.0;
                    nv = 1.0;
                }
                for (double& x : v) x /= nv;
            }
            // orthogonalize inside near-degenerate clusters
            for (const EigenPair& prev : out) {
                if (std::abs(prev.value - lam) < 1e-8 * scale) {
                    double dot = 0;
                    for (int i = 0; i < n; ++i) dot += prev.vec[i] * v[i];
                    for (int i = 0; i < n; ++i) v[i] -= dot * prev.vec[i];
                    double nv = norm2(v);
                    if (nv > 0)
                        for (double& x : v) x /= nv;
                }
            }
            tridiag_apply(m, v, mv);
            double rq = 0;
            for (int i = 0; i < n; ++i) rq += v[i] * mv[i];
            lam = rq;
            resid = 0;
            for (int i = 0; i < n; ++i) {
                double r = mv[i] - lam * v[i];
                resid += r * r;
            }
            resid = std::sqrt(resid);
            // retry with the polished shift, nudged off exact singularity
            shift = lam + (attempt + 1) * 1e-14 * scale;
        }
        if (resid > resid_tol)
            throw ConvergenceError("sym_tridiag_eigs: eigenpair " + std::to_string(j) +
                                   " residual " + std::to_string(resid) + " above tolerance");

        // deterministic sign: largest-magnitude component positive
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        if (v[imax] < 0)
            for (double& x : v) x = -x;

        if (!weights.empty()) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += weights[i] * v[i] * v[i];
            if (s <= 0) throw DomainError("sym_tridiag_eigs: weighted norm not positive");
            double inv = 1.0 / std::sqrt(s);
            for (double& x : v) x *= inv;
        }
        out.push_back({lam, std::move(v)});
    }
    // bisection returns them ascending already; enforce in case polish reordered ties
    std::sort(out.begin(), out.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    return out;
}

double find_root(const std::function<double(double)>& fcn, double lo, double hi, double tol) {
    if (!(lo < hi)) throw DomainError("find_root: need lo < hi");
    double flo = fcn(lo), fhi = fcn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0) == (fhi < 0))
        throw BracketError("find_root: no sign change on bracket");

    const double fscale = std::max({std::abs(flo), std::abs(fhi), 1.0});
    // bisection to the requested bracket width
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = fcn(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // secant polish, confined to the bracket
    double x0 = lo, f0 = flo, x1 = hi, f1 = fhi;
    for (int it = 0; it < 20; ++it) {
        if (std::abs(f1) <= 1e-12 * fscale) break;
        double denom = f1 - f0;
        double x2;
        if (denom == 0.0)
            x2 = 0.5 * (lo + hi);
        else {
            x2 = x1 - f1 * (x1 - x0) / denom;
            if (!(x2 > lo && x2 < hi)) x2 = 0.5 * (lo + hi);
        }
        double f2 = fcn(x2);
        if (f2 == 0.0) return x2;
        if ((f2 < 0) == (flo < 0)) {
            lo = x2;
            flo = f2;
        } else {
            hi = x2;
            fhi = f2;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if (hi - lo <= DBL_EPSILON * (std::abs(lo) + std::abs(hi))) break;
    }
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

double integrate_weighted(const std::vector<double>& values,
                          const std::vector<double>& weights,
                          const UniformGrid1D& grid) {
    const int n = grid.n_points;
    if (static_cast<int>(values.size()) != n || static_cast<int>(weights.size()) != n)
        throw DomainError("integrate_weighted: length mismatch with grid");
    if (n < 2) throw DomainError("integrate_weighted: need at least 2 points");
    const double h = grid.spacing();
    auto g = [&](int i) { return values[i] * weights[i]; };

    if (n == 2) return 0.5 * h * (g(0) + g(1));  // no better rule available
    if (n == 3) return h / 3.0 * (g(0) + 4 * g(1) + g(2));

    int simpson_end = (n % 2 == 1) ? n - 1 : n - 4;  // even # of Simpson intervals
    double s = 0.0;
    if (simpson_end > 0) {
        s += g(0) + g(simpson_end);
        for (int i = 1; i < simpson_end; i += 2) s += 4 * g(i);
        for (int i = 2; i < simpson_end; i += 2) s += 2 * g(i);
        s *= h / 3.0;
    }
    if (n % 2 == 0) {  // 3/8 rule on the last three intervals
        int i = n - 4;
        s += 3.0 * h / 8.0 * (g(i) + 3 * g(i + 1) + 3 * g(i + 2) + g(i + 3));
    }
    return s;
}

std::vector<double> derivative_fourth_order(const std::vector<double>& v, double h) {
    const int n = static_cast<int>(v.size());
    if (n < 5) throw DomainError("derivative_fourth_order: need at least 5 points");
    std::vector<double> d(n);
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]);
    d[1] = c * (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]);
    for (int i = 2; i < n - 2; ++i)
        d[i] = c * (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]);
    d[n - 2] = -c * (-3 * v[n - 1] - 10 * v[n - 2] + 18 * v[n - 3] - 6 * v[n - 4] + v[n - 5]);
    d[n - 1] = -c * (-25 * v[n - 1] + 48 * v[n - 2] - 36 * v[n - 3] + 16 * v[n - 4] - 3 * v[n - 5]);
    return d;
}

LuFactor lu_factor(DenseMatrix m) {
    const int n = m.n;
    LuFactor f;
    f.piv.resize(n);
    f.max_entry = 0.0;
    for (double x : m.a) f.max_entry = std::max(f.max_entry, std::abs(x));
    f.min_pivot = HUGE_VAL;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m.at(i, k)) > std::abs(m.at(p, k))) p = i;
        f.piv[k] = p;
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
        double piv = m.at(k, k);
        f.min_pivot = std::min(f.min_pivot, std::abs(piv));
        if (piv == 0.0)
            throw ConditioningError("lu_factor: exact zero pivot at " + std::to_string(k));
        double inv = 1.0 / piv;
        for (int i = k + 1; i < n; ++i) {
            double mult = m.at(i, k) * inv;
            m.at(i, k) = mult;
            if (mult != 0.0)
                for (int j = k + 1; j < n; ++j) m.at(i, j) -= mult * m.at(k, j);
        }
    }
    f.lu = std::move(m);
    return f;
}

void LuFactor::solve(std::vector<double>& b) const {
    const int n = lu.n;
    // stored L entries live in post-swap row positions, so all interchanges
    // must be applied to the right-hand side before the triangular sweeps
    for (int k = 0; k < n; ++k)
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) b[i] -= lu.at(i, k) * b[k];
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= lu.at(i, j) * b[j];
        b[i] = s / lu.at(i, i);
    }
}

void LuFactor::solve_many(std::vector<std::vector<double>>& cols) const {
    for (auto& c : cols) solve(c);
}

void solve_tridiag(std::vector<double> dl, std::vector<double> d, std::vector<double> du,
                   std::vector<double>& b, double rcond_floor) {
    const int n = static_cast<int>(d.size());
    if (static_cast<int>(b.size()) != n) throw DomainError("solve_tridiag: rhs length mismatch");
    std::vector<double> du2(std::max(n - 2, 0), 0.0);
    double max_entry = 0.0;
    for (double x : d) max_entry = std::max(max_entry, std::abs(x));
    for (double x : dl) max_entry = std::max(max_entry, std::abs(x));
    for (double x : du) max_entry = std::max(max_entry, std::abs(x));
    double min_pivot = HUGE_VAL;

    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            double piv = d[i];
            min_pivot = std::min(min_pivot, std::abs(piv));
            if (piv == 0.0) throw ConditioningError("solve_tridiag: zero pivot");
            double mult = dl[i] / piv;
            d[i + 1] -= mult * du[i];
            b[i + 1] -= mult * b[i];
        } else {
            double mult = d[i] / dl[i];
            min_pivot = std::min(min_pivot, std::abs(dl[i]));
            d[i] = dl[i];
            double tmp = d[i + 1];
            d[i + 1] = du[i] - mult * tmp;
            du[i] = tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -mult * du[i + 1];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= mult * b[i];
        }
    }
    min_pivot = std::min(min_pivot, std::abs(d[n - 1]));
    if (min_pivot < rcond_floor * std::max(max_entry, DBL_MIN))
        throw ConditioningError("solve_tridiag: system near singular (pivot ratio " +
                                std::to_string(min_pivot / std::max(max_entry, DBL_MIN)) + ")");
    b[n - 1] /= d[n - 1];
    if (n >= 2) {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for (int i = n - 3; i >= 0; --i)
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

void solve_block_tridiag(const std::vector<DenseMatrix>& sub, std::vector<DenseMatrix>& diag,
                         const std::vector<DenseMatrix>& sup,
                         std::vector<std::vector<double>>& rhs) {
    const int nb = static_cast<int>(diag.size());
    if (nb == 0) return;
    const int bs = diag[0].n;
    std::vector<LuFactor> factors;
    factors.reserve(nb);
    // forward elimination: diag[i] -= sub[i] * diag[i-1]^{-1} * sup[i-1]
    std::vector<std::vector<double>> cols(bs, std::vector<double>(bs));
    std::vector<DenseMatrix> w(nb);  // w[i-1] = diag[i-1]^{-1} sup[i-1]
    for (int i = 0; i < nb; ++i) {
        if (i > 0) {
            const DenseMatrix& A = sub[i];
            const DenseMatrix& W = w[i - 1];
            DenseMatrix& B = diag[i];
            for (int r = 0; r < bs; ++r)
                for (int c = 0; c < bs; ++c) {
                    double s = 0;
                    for (int t = 0; t < bs; ++t) s += A.at(r, t) * W.at(t, c);
                    B.at(r, c) -= s;
                }
            std::vector<double>& b = rhs[i];
            const std::vector<double>& bp = rhs[i - 1];
            for (int r = 0; r < bs; ++r) {
                double s = 0;
                for (int t = 0; t < bs; ++t) s += A.at(r, t) * bp[t];
                b[r] -= s;
            }
        }
        factors.push_back(lu_factor(diag[i]));
        factors.back().solve(rhs[i]);
        if (i + 1 < nb) {
            // w[i] = diag[i]^{-1} sup[i]
            for (int c = 0; c < bs; ++c)
                for (int r = 0; r < bs; ++r) cols[c][r] = sup[i].at(r, c);
            factors.back().solve_many(cols);
            w[i] = DenseMatrix(bs);
            for (int c = 0; c < bs; ++c)
                for (int r = 0; r < bs; ++r) w[i].at(r, c) = cols[c][r];
        }
    }
    // back substitution: x[i] -= w[i] * x[i+1]
    for (int i = nb - 2; i >= 0; --i) {
        const DenseMatrix& W = w[i];
        const std::vector<double>& xn = rhs[i + 1];
        std::vector<double>& x = rhs[i];
        for (int r = 0; r < bs; ++r) {
            double s = 0;
            for (int t = 0; t < bs; ++t) s += W.at(r, t) * xn[t];
            x[r] -= s;
        }
    }
}

void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
    n_threads = std::max(1, std::min(n_threads, n));
    if (n_threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error = nullptr;
    std::mutex err_mutex;
    std::atomic<int> next{0};
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ovd
