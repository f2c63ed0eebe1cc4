#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "errb/numerics.hpp"
#include "errb/rng.hpp"

using namespace errb;

namespace {

SymMatrix random_symmetric(SplitMix64& rng, int n, double scale_to = 2.0) {
    std::vector<Vec> rows(n, Vec(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double v = rng.uniform(-scale_to, scale_to);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    return SymMatrix::from_rows(rows);
}

double reconstruction_error(const SymMatrix& A, const EigDecomposition& e) {
    int n = A.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += e.eigenvectors[k][i] * e.eigenvalues[k] * e.eigenvectors[k][j];
            worst = std::max(worst, std::abs(s - A(i, j)));
        }
    return worst;
}

double orthonormality_error(const EigDecomposition& e) {
    std::size_t n = e.eigenvalues.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = dot(e.eigenvectors[i], e.eigenvectors[j]);
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

// dense grid scan, the stated independent oracle for minimize_1d
double grid_min(const std::function<double(double)>& phi, double lo, double hi, int n = 10000) {
    double best = kInf;
    for (int i = 0; i <= n; ++i) {
        double v = phi(lo + (hi - lo) * i / n);
        best = std::min(best, v);
    }
    return best;
}

} // namespace

TEST_CASE("eig_sym on diagonal and hand-checked matrices") {
    auto e = eig_sym(SymMatrix::diagonal({4.0, 1.0}));
    REQUIRE(e.eigenvalues[0] == Catch::Approx(4.0));
    REQUIRE(e.eigenvalues[1] == Catch::Approx(1.0));
    REQUIRE(std::abs(e.eigenvectors[0][0]) == Catch::Approx(1.0));
    REQUIRE(std::abs(e.eigenvectors[1][1]) == Catch::Approx(1.0));

    auto z = eig_sym(SymMatrix::zero(2));
    REQUIRE(z.eigenvalues[0] == 0.0);
    REQUIRE(z.eigenvalues[1] == 0.0);

    // characteristic polynomial of [[2,1],[1,2]]: (2-l)^2 - 1 -> 3, 1
    auto m = eig_sym(SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}));
    REQUIRE(m.eigenvalues[0] == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(m.eigenvalues[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("eig_sym reconstruction and orthonormality on random matrices") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.next() % 8);
        SymMatrix A = random_symmetric(rng, n);
        auto e = eig_sym(A);
        REQUIRE(reconstruction_error(A, e) <= 1e-9 * (1.0 + A.max_abs()));
        REQUIRE(orthonormality_error(e) <= 1e-10);
        for (std::size_t j = 1; j < e.eigenvalues.size(); ++j)
            REQUIRE(e.eigenvalues[j - 1] >= e.eigenvalues[j]);
    }
}

TEST_CASE("SymMatrix rejects asymmetric input") {
    REQUIRE_THROWS_AS(SymMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}), ConstructionError);
}

TEST_CASE("pinv_apply range tests") {
    SymMatrix A = SymMatrix::diagonal({1.0, 0.0});
    auto r1 = pinv_apply(A, {3.0, 0.0});
    REQUIRE(r1.in_range);
    REQUIRE(r1.w[0] == Catch::Approx(3.0));
    REQUIRE(r1.w[1] == Catch::Approx(0.0));

    auto r2 = pinv_apply(A, {0.0, 1.0});
    REQUIRE_FALSE(r2.in_range); // (0,1) is not in A(R^2)

    auto r3 = pinv_apply(SymMatrix::diagonal({2.0, 4.0}), {2.0, 4.0});
    REQUIRE(r3.in_range);
    REQUIRE(r3.w[0] == Catch::Approx(1.0));
    REQUIRE(r3.w[1] == Catch::Approx(1.0));
}

TEST_CASE("pinv idempotence on random PSD matrices") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng.next() % 6);
        SymMatrix B = random_symmetric(rng, n);
        // A = B^2 is PSD with range equal to range(B)
        std::vector<Vec> rows(n, Vec(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += B(i, k) * B(k, j);
                rows[i][j] = s;
            }
        SymMatrix A = SymMatrix::symmetrized(rows);
        Vec x = gaussian_vec(rng, n);
        Vec ax = A.apply(x);
        Vec w = pinv_apply(A, ax).w;
        Vec aw = A.apply(w);
        REQUIRE(norm2(sub(aw, ax)) <= 1e-8 * (1.0 + norm2(ax)));
    }
}

TEST_CASE("minimize_1d on smooth, monotone and infinity-plateau objectives") {
    auto q = minimize_1d([](double t) { return (t - 0.3) * (t - 0.3); }, 0.0, 1.0, 1e-8);
    REQUIRE(q.arg == Catch::Approx(0.3).margin(1e-7));

    auto lin = minimize_1d([](double t) { return t; }, 0.0, 1.0, 1e-8);
    REQUIRE(lin.arg == Catch::Approx(0.0).margin(1e-7));

    auto plateau = minimize_1d([](double t) { return t < 0.5 ? kInf : t; }, 0.0, 1.0, 1e-8);
    double oracle = grid_min([](double t) { return t < 0.5 ? kInf : t; }, 0.0, 1.0);
    REQUIRE(plateau.value == Catch::Approx(oracle).margin(1e-6));
    REQUIRE(plateau.arg == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("minimize_1d throws AllInfinite when no finite value exists") {
    REQUIRE_THROWS_AS(minimize_1d([](double) { return kInf; }, 0.0, 1.0, 1e-3), AllInfinite);
}

TEST_CASE("minimize_1d matches a dense grid scan on random convex quadratics") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        double a = rng.uniform(0.1, 5.0);
        double b = rng.uniform(-3.0, 3.0);
        double c = rng.uniform(-1.0, 1.0);
        auto phi = [=](double t) { return a * t * t + b * t + c; };
        auto m = minimize_1d(phi, 0.0, 1.0, 1e-8);
        double oracle = grid_min(phi, 0.0, 1.0);
        REQUIRE(m.value <= oracle + 1e-6 * (1.0 + std::abs(oracle)));
        REQUIRE(m.value >= oracle - 1e-6 * (1.0 + std::abs(oracle)));
    }
}

TEST_CASE("find_root_1d brackets simple roots") {
    REQUIRE(find_root_1d([](double t) { return t - 2.0; }, 0.0, 5.0, 1e-12) ==
            Catch::Approx(2.0).margin(1e-10));
    REQUIRE(find_root_1d([](double t) { return t * t * t - 8.0; }, 0.0, 5.0, 1e-12) ==
            Catch::Approx(2.0).margin(1e-10));
    REQUIRE_THROWS_AS(find_root_1d([](double t) { return t + 1.0; }, 0.0, 5.0, 1e-12), NoBracket);
}

TEST_CASE("find_root_1d locates the level-set projection multiplier") {
    // projecting x = (3,0) onto the I2 ellipse 1/2(x1^2 + 4 x2^2) <= 1:
    // s(mu) = (3/(1+mu), 0), f on the boundary at the root
    auto f = [](const Vec& p) { return 0.5 * (p[0] * p[0] + 4.0 * p[1] * p[1]) - 1.0; };
    auto phi = [&](double mu) { return f({3.0 / (1.0 + mu), 0.0}); };
    double mu = find_root_1d(phi, 0.0, 10.0, 1e-12);
    REQUIRE(std::abs(phi(mu)) <= 1e-8);
    // boundary point is (sqrt 2, 0)
    REQUIRE(3.0 / (1.0 + mu) == Catch::Approx(std::sqrt(2.0)).margin(1e-8));
}
