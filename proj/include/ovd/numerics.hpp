#ifndef OVD_NUMERICS_HPP
#define OVD_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovd {

// Error hierarchy. Exit-code mapping lives in the CLI: assumption-level
// failures map to 2, numerical failures to 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct BracketError : Error {
    using Error::Error;
};
struct ConvergenceError : Error {
    using Error::Error;
};
struct ConditioningError : Error {
    using Error::Error;
};
// Structural hypotheses of the problem could not be certified
// (no ground state, degenerate linearization, ...).
struct AssumptionError : Error {
    using Error::Error;
};
// Shooting map flat in the amplitude: a scale-invariant family
// (linear f at an eigenvalue). Reported, never silently "solved".
struct ScaleInvariantError : AssumptionError {
    using AssumptionError::AssumptionError;
};
struct PositivityError : Error {
    using Error::Error;
};

struct UniformGrid1D {
    int n_points = 0;
    double a = 0.0;
    double b = 1.0;

    UniformGrid1D() = default;
    UniformGrid1D(int n, double a_, double b_);

    double spacing() const { return (b - a) / (n_points - 1); }
    double node(int i) const { return a + i * spacing(); }
};

struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;  // length diag.size()-1 (empty for 1x1)

    int size() const { return static_cast<int>(diag.size()); }
    void validate() const;
    // infinity norm (max absolute row sum)
    double norm_inf() const;
};

struct BallGeometry {
    int n = 1;          // dimension of the ball B in R^n
    double omega_n = 2; // area of the unit sphere S^{n-1}

    static BallGeometry make(int n);
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> vec;
};

// Number of eigenvalues of m strictly below x (Sturm sequence count).
int sturm_count_below(const SymTridiag& m, double x);

// Smallest k eigenpairs, ascending. Bisection on Sturm sequences for the
// values, inverse iteration for the vectors, Rayleigh-quotient polish.
// If weights is nonempty, eigenvectors are normalized so that
// sum_i weights[i]*v[i]^2 = 1, otherwise to unit Euclidean norm.
// Residual guarantee: ||M v - lambda v||_2 <= 1e-10 * ||M||_inf per pair.
std::vector<EigenPair> sym_tridiag_eigs(const SymTridiag& m, int k,
                                        const std::vector<double>& weights = {});

// Bracketed scalar root: bisection to bracket width <= tol, then secant
// polishing. Deterministic; requires a sign change on [lo, hi].
double find_root(const std::function<double(double)>& fcn, double lo, double hi,
                 double tol = 1e-8);

// Composite Simpson of values[i]*weights[i] over the grid. n_points may be
// even; the tail then uses the 3/8 rule so the O(h^4) order is kept.
double integrate_weighted(const std::vector<double>& values,
                          const std::vector<double>& weights,
                          const UniformGrid1D& grid);

// Fourth-order first derivative of nodal values on a uniform grid
// (5-point stencils, one-sided at the ends).
std::vector<double> derivative_fourth_order(const std::vector<double>& values, double h);

// --- small dense linear algebra (row-major square matrices) ---

struct DenseMatrix {
    int n = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    explicit DenseMatrix(int n_) : n(n_), a(static_cast<size_t>(n_) * n_, 0.0) {}
    double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

struct LuFactor {
    DenseMatrix lu;
    std::vector<int> piv;
    double min_pivot = 0.0;
    double max_entry = 0.0;

    void solve(std::vector<double>& b) const;                 // in place
    void solve_many(std::vector<std::vector<double>>&) const; // columns in place
};

LuFactor lu_factor(DenseMatrix m);

// Tridiagonal solve with partial pivoting (second superdiagonal fill-in).
// dl, d, du are the sub/main/super diagonals; b is overwritten with x.
// Throws ConditioningError when the smallest pivot falls below
// rcond_floor * max entry.
void solve_tridiag(std::vector<double> dl, std::vector<double> d,
                   std::vector<double> du, std::vector<double>& b,
                   double rcond_floor = 1e-14);

// Block-tridiagonal solve, dense blocks, no inter-block pivoting.
// sub[i] couples row-block i to i-1 (sub[0] unused), sup[i] to i+1
// (sup[last] unused). diag and rhs are overwritten.
void solve_block_tridiag(const std::vector<DenseMatrix>& sub,
                         std::vector<DenseMatrix>& diag,
                         const std::vector<DenseMatrix>& sup,
                         std::vector<std::vector<double>>& rhs);

// Deterministic parallel map: fn(i) for i in [0, n), results must be written
// to preallocated slots by the caller. Exceptions are rethrown on the caller.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn);

}  // namespace ovd

#endif
