#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ovd/numerics.hpp"

using namespace ovd;

TEST_CASE("tridiagonal eigenvalues: closed-form Laplacian spectrum") {
    // eigenvalues of diag 2 / off -1 are 2 - 2 cos(j pi/(N+1)); verified
    // against direct characteristic-polynomial (Sturm count) evaluation
    const int N = 40;
    SymTridiag m;
    m.diag.assign(N, 2.0);
    m.off.assign(N - 1, -1.0);
    auto pairs = sym_tridiag_eigs(m, N);
    REQUIRE(pairs.size() == static_cast<size_t>(N));
    double trace = 0;
    for (int j = 0; j < N; ++j) {
        double exact = 2.0 - 2.0 * std::cos((j + 1) * M_PI / (N + 1));
        CHECK(pairs[j].value == doctest::Approx(exact).epsilon(1e-12));
        trace += pairs[j].value;
        // characteristic-polynomial cross-check: count below lambda +- delta
        CHECK(sturm_count_below(m, pairs[j].value - 1e-9) == j);
        CHECK(sturm_count_below(m, pairs[j].value + 1e-9) == j + 1);
    }
    CHECK(std::abs(trace - 2.0 * N) <= 1e-9);

    // residuals and ascending order
    for (int j = 0; j < N; ++j) {
        const auto& v = pairs[j].vec;
        double resid = 0;
        for (int i = 0; i < N; ++i) {
            double mv = m.diag[i] * v[i];
            if (i > 0) mv += m.off[i - 1] * v[i - 1];
            if (i < N - 1) mv += m.off[i] * v[i + 1];
            resid += (mv - pairs[j].value * v[i]) * (mv - pairs[j].value * v[i]);
        }
        CHECK(std::sqrt(resid) <= 1e-10 * m.norm_inf());
        if (j > 0) CHECK(pairs[j].value > pairs[j - 1].value);
    }
}

TEST_CASE("tridiagonal eigenvalues: 1x1 and zero matrices") {
    SymTridiag one;
    one.diag = {5.0};
    auto p = sym_tridiag_eigs(one, 1);
    CHECK(p[0].value == doctest::Approx(5.0));
    CHECK(std::abs(p[0].vec[0]) == doctest::Approx(1.0));

    SymTridiag zero;
    zero.diag.assign(6, 0.0);
    zero.off.assign(5, 0.0);
    auto z = sym_tridiag_eigs(zero, 6);
    for (const auto& pair : z) CHECK(std::abs(pair.value) <= 1e-14);
}

TEST_CASE("tridiagonal eigenvalues: caller-supplied weighted normalization") {
    const int N = 12;
    SymTridiag m;
    m.diag.assign(N, 2.0);
    m.off.assign(N - 1, -1.0);
    std::vector<double> w(N);
    for (int i = 0; i < N; ++i) w[i] = 1.0 + 0.1 * i;
    auto pairs = sym_tridiag_eigs(m, 3, w);
    for (const auto& p : pairs) {
        double s = 0;
        for (int i = 0; i < N; ++i) s += w[i] * p.vec[i] * p.vec[i];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("find_root: transcendental bracket against bisection oracle") {
    auto f = [](double mu) { return mu * std::tanh(mu) - 1.0; };
    double expect = oracle::bisect(f, 0.5, 2.0);  // independent route
    double got = find_root(f, 0.5, 2.0, 1e-10);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    CHECK(got == doctest::Approx(1.199679).epsilon(1e-6));
    CHECK(std::abs(f(got)) <= 1e-10);
}

TEST_CASE("find_root: trivial cases and errors") {
    CHECK(find_root([](double x) { return x; }, -1.0, 1.0, 1e-8) ==
          doctest::Approx(0.0).epsilon(1e-8));
    CHECK(find_root([](double x) { return x * x - 4.0; }, 0.0, 3.0, 1e-8) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(find_root([](double x) { return 1.0 + x * x; }, -1.0, 1.0, 1e-8),
                    BracketError);

    // determinism: bit-identical repeats
    auto g = [](double x) { return std::cos(3 * x) - 0.2 * x; };
    double r1 = find_root(g, 0.0, 1.0, 1e-8);
    double r2 = find_root(g, 0.0, 1.0, 1e-8);
    CHECK(r1 == r2);
}

TEST_CASE("integrate_weighted: polynomial exactness and smooth accuracy") {
    UniformGrid1D g(201, 0.0, 1.0);
    std::vector<double> ones(201, 1.0), r2(201), sinpi(201);
    for (int i = 0; i < 201; ++i) {
        double r = g.node(i);
        r2[i] = r * r;
        sinpi[i] = std::sin(M_PI * r);
    }
    CHECK(std::abs(integrate_weighted(ones, r2, g) - 1.0 / 3.0) <= 1e-10);
    CHECK(std::abs(integrate_weighted(r2, ones, g) - 1.0 / 3.0) <= 1e-10);
    CHECK(std::abs(integrate_weighted(sinpi, ones, g) - 2.0 / M_PI) <= 1e-8);

    // even point count falls back to the 3/8 tail but keeps the order
    UniformGrid1D ge(200, 0.0, 1.0);
    std::vector<double> se(200), oe(200, 1.0);
    for (int i = 0; i < 200; ++i) se[i] = std::sin(M_PI * ge.node(i));
    CHECK(std::abs(integrate_weighted(se, oe, ge) - 2.0 / M_PI) <= 1e-8);

    CHECK_THROWS_AS(integrate_weighted(ones, r2, ge), DomainError);
}

TEST_CASE("integrate_weighted: linearity in the values") {
    UniformGrid1D g(101, 0.0, 1.0);
    std::vector<double> u(101), v(101), w(101), lin(101);
    for (int i = 0; i < 101; ++i) {
        double r = g.node(i);
        u[i] = std::sin(5 * r);
        v[i] = std::exp(-r);
        w[i] = 1.0 + r;
        lin[i] = 2.5 * u[i] - 0.75 * v[i];
    }
    double lhs = integrate_weighted(lin, w, g);
    double rhs = 2.5 * integrate_weighted(u, w, g) - 0.75 * integrate_weighted(v, w, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("derivative_fourth_order converges at fourth order") {
    auto err_at = [](int n) {
        UniformGrid1D g(n, 0.0, 1.0);
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = std::sin(2 * g.node(i));
        auto d = derivative_fourth_order(v, g.spacing());
        double worst = 0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(d[i] - 2 * std::cos(2 * g.node(i))));
        return worst;
    };
    double e1 = err_at(101), e2 = err_at(201);
    CHECK(e1 / e2 > 12.0);  // ~16 for a clean fourth order
}

TEST_CASE("dense LU and tridiagonal solve") {
    DenseMatrix m(4);
    std::vector<double> xref = {1.0, -2.0, 0.5, 3.0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m.at(i, j) = 1.0 / (1.0 + i + j) + (i == j ? 2.0 : 0.0);
    std::vector<double> b(4, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b[i] += m.at(i, j) * xref[j];
    LuFactor lu = lu_factor(m);
    lu.solve(b);
    for (int i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(xref[i]).epsilon(1e-12));

    const int n = 50;
    std::vector<double> dl(n - 1), d(n), du(n - 1), rhs(n), x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(1.0 + i);
    for (int i = 0; i < n; ++i) d[i] = 3.0 + 0.01 * i;
    for (int i = 0; i < n - 1; ++i) {
        dl[i] = -1.0 + 0.02 * i;
        du[i] = 2.0 - 0.01 * i;
    }
    for (int i = 0; i < n; ++i) {
        rhs[i] = d[i] * x[i];
        if (i > 0) rhs[i] += dl[i - 1] * x[i - 1];
        if (i < n - 1) rhs[i] += du[i] * x[i + 1];
    }
    solve_tridiag(dl, d, du, rhs);
    for (int i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("block tridiagonal solve matches a dense assembly") {
    const int nb = 5, bs = 3;
    std::vector<DenseMatrix> sub(nb), diag(nb), sup(nb);
    auto fill = [](DenseMatrix& m, int seed, double boost) {
        m = DenseMatrix(3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m.at(i, j) = std::sin(seed + 3.0 * i + j) + (i == j ? boost : 0.0);
    };
    DenseMatrix full(nb * bs);
    for (int k = 0; k < nb; ++k) {
        fill(diag[k], 10 * k, 6.0);
        if (k > 0) fill(sub[k], 10 * k + 1, 0.0);
        if (k + 1 < nb) fill(sup[k], 10 * k + 2, 0.0);
        for (int i = 0; i < bs; ++i)
            for (int j = 0; j < bs; ++j) {
                full.at(k * bs + i, k * bs + j) = diag[k].at(i, j);
                if (k > 0) full.at(k * bs + i, (k - 1) * bs + j) = sub[k].at(i, j);
                if (k + 1 < nb) full.at(k * bs + i, (k + 1) * bs + j) = sup[k].at(i, j);
            }
    }
    std::vector<double> xref(nb * bs), b(nb * bs, 0.0);
    for (int i = 0; i < nb * bs; ++i) xref[i] = std::cos(0.7 * i);
    for (int i = 0; i < nb * bs; ++i)
        for (int j = 0; j < nb * bs; ++j) b[i] += full.at(i, j) * xref[j];
    std::vector<std::vector<double>> rhs(nb, std::vector<double>(bs));
    for (int k = 0; k < nb; ++k)
        for (int i = 0; i < bs; ++i) rhs[k][i] = b[k * bs + i];
    solve_block_tridiag(sub, diag, sup, rhs);
    for (int k = 0; k < nb; ++k)
        for (int i = 0; i < bs; ++i)
            CHECK(rhs[k][i] == doctest::Approx(xref[k * bs + i]).epsilon(1e-10));
}

TEST_CASE("ball geometry constants") {
    CHECK(BallGeometry::make(1).omega_n == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(BallGeometry::make(2).omega_n == doctest::Approx(2 * M_PI).epsilon(1e-14));
    CHECK(BallGeometry::make(3).omega_n == doctest::Approx(4 * M_PI).epsilon(1e-14));
    CHECK_THROWS_AS(BallGeometry::make(0), DomainError);
}

TEST_CASE("parallel_for is deterministic and forwards exceptions") {
    std::vector<double> slots(64, 0.0);
    parallel_for(64, 4, [&](int i) { slots[i] = std::sin(i); });
    for (int i = 0; i < 64; ++i) CHECK(slots[i] == std::sin(i));
    CHECK_THROWS_AS(
        parallel_for(8, 4, [](int i) {
            if (i == 5) throw DomainError("boom");
        }),
        DomainError);
}
