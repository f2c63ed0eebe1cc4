#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "errb/functions.hpp"
#include "errb/harness.hpp"
#include "errb/rng.hpp"

using namespace errb;

namespace {

const double kSqrt2 = std::sqrt(2.0);

ConvexFunctionSpec abs_minus_one() {
    return ConvexFunctionSpec::max_affine({{{1.0}, 1.0}, {{-1.0}, 1.0}});
}

ConvexFunctionSpec half_square_minus_one() {
    return ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0}), {0.0}, 1.0);
}

ConvexFunctionSpec ellipse_i2() {
    return ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, 4.0}), {0.0, 0.0}, 1.0);
}

ConvexFunctionSpec singular_i4() {
    return ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, 0.0}), {0.0, 0.0}, 1.0);
}

ConvexFunctionSpec soc_i5() {
    AffineMap g({{0.0}, {1.0}}, {-1.0, 0.0});
    return ConvexFunctionSpec::scalarized(g, ConeSpec::second_order(2));
}

// grid biconjugate of eval at x: sup_y <y,x> - fstar_grid(y)
double grid_biconjugate(const ConvexFunctionSpec& f, const Vec& x, double y_hw, double y_step,
                        double x_hw, double x_step) {
    std::vector<Vec> ys;
    if (f.dim() == 1) {
        for (double y = -y_hw; y <= y_hw + 1e-12; y += y_step) ys.push_back({y});
    } else {
        for (double y1 = -y_hw; y1 <= y_hw + 1e-12; y1 += y_step)
            for (double y2 = -y_hw; y2 <= y_hw + 1e-12; y2 += y_step) ys.push_back({y1, y2});
    }
    auto stars = oracle_conjugate_batch(f, ys, x_hw, x_step);
    double best = -kInf;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (stars[i].max_on_boundary) continue; // escaped: f*(y) = +inf
        best = std::max(best, dot(ys[i], x) - stars[i].value);
    }
    return best;
}

} // namespace

TEST_CASE("eval on the three variants") {
    auto q = half_square_minus_one();
    REQUIRE(eval(q, {2.0}) == Catch::Approx(1.0));

    auto ma = abs_minus_one();
    REQUIRE(eval(ma, {0.0}) == Catch::Approx(-1.0));

    auto sc = soc_i5();
    REQUIRE(eval(sc, {3.0}) == Catch::Approx(kSqrt2).margin(1e-12));
    REQUIRE(eval(sc, {0.0}) == Catch::Approx(-1.0 / kSqrt2).margin(1e-12));
}

TEST_CASE("plus_part") {
    auto ma = abs_minus_one();
    REQUIRE(plus_part(ma, {0.0}) == 0.0);
    REQUIRE(plus_part(ma, {3.0}) == Catch::Approx(2.0));
    REQUIRE(plus_part(ellipse_i2(), {0.0, 0.0}) == 0.0);
}

TEST_CASE("eval rejects dimension mismatches") {
    REQUIRE_THROWS_AS(eval(abs_minus_one(), Vec{1.0, 2.0}), DimensionMismatch);
    REQUIRE_THROWS_AS(subgradient(ellipse_i2(), Vec{1.0}), DimensionMismatch);
}

TEST_CASE("quadratic construction rejects indefinite matrices") {
    REQUIRE_THROWS_AS(
        ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, -0.5}), {0.0, 0.0}, 1.0),
        ConstructionError);
}

TEST_CASE("conjugate closed forms") {
    auto q = half_square_minus_one();
    REQUIRE(conjugate(q, {1.0}) == Catch::Approx(1.5)); // 1/2 y^2 + c

    auto sing = ConvexFunctionSpec::quadratic(SymMatrix::diagonal({1.0, 0.0}), {0.0, 0.0}, 0.0);
    REQUIRE(conjugate(sing, {0.0, 1.0}) == kInf); // y outside b + A(R^m)
    REQUIRE(conjugate(sing, {0.7, 0.0}) == Catch::Approx(0.5 * 0.49));

    auto ma = abs_minus_one();
    REQUIRE(conjugate(ma, {0.5}) == Catch::Approx(1.0)); // weights (3/4, 1/4) on beta = 1
    REQUIRE(conjugate(ma, {2.0}) == kInf);               // outside conv{a_i} = [-1, 1]

    REQUIRE_THROWS_AS(conjugate(soc_i5(), Vec{1.0}), Unsupported);
}

TEST_CASE("conjugate matches the grid oracle on canonical instances") {
    SplitMix64 rng(1234);

    auto check = [&](const ConvexFunctionSpec& f, const Vec& y, double hw, double res) {
        double closed = conjugate(f, y);
        OracleValue o = oracle_conjugate(f, y, hw, res);
        if (std::isfinite(closed)) {
            REQUIRE_FALSE(o.max_on_boundary);
            REQUIRE(closed == Catch::Approx(o.value).margin(1e-3));
        } else {
            REQUIRE(o.max_on_boundary);
        }
    };

    auto ma = abs_minus_one();
    for (int i = 0; i < 25; ++i) check(ma, {rng.uniform(-0.95, 0.95)}, 10.0, 1e-3);
    check(ma, {2.0}, 10.0, 1e-3);

    auto q = half_square_minus_one();
    for (int i = 0; i < 25; ++i) check(q, {rng.uniform(-3.0, 3.0)}, 10.0, 1e-3);

    auto e2 = ellipse_i2();
    for (int i = 0; i < 10; ++i)
        check(e2, {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}, 6.0, 0.01);

    auto s4 = singular_i4();
    for (int i = 0; i < 10; ++i) check(s4, {rng.uniform(-2.0, 2.0), 0.0}, 6.0, 0.01);
    REQUIRE(conjugate(s4, {0.5, 0.3}) == kInf);
}

TEST_CASE("lambda_scaled_conjugate") {
    auto q = half_square_minus_one();
    REQUIRE(lambda_scaled_conjugate(q, 2.0, {2.0}) == Catch::Approx(3.0)); // 2 f*(1)
    REQUIRE(lambda_scaled_conjugate(q, 0.0, {0.0}) == 0.0);
    REQUIRE(lambda_scaled_conjugate(q, 0.0, {0.5}) == kInf);
    REQUIRE(lambda_scaled_conjugate(abs_minus_one(), 0.0, {0.0}) == 0.0);
}

TEST_CASE("subgradients with deterministic tie-breaking") {
    auto ma = abs_minus_one();
    REQUIRE(subgradient(ma, {2.0})[0] == Catch::Approx(1.0));
    REQUIRE(subgradient(ma, {0.0})[0] == Catch::Approx(1.0)); // lowest index on ties

    auto e2 = ellipse_i2();
    Vec g = subgradient(e2, {1.0, 1.0});
    REQUIRE(g[0] == Catch::Approx(1.0));
    REQUIRE(g[1] == Catch::Approx(4.0));

    // scalarized chain rule: f(x) = (x - 1)/sqrt(2) for x > 1
    Vec gs = subgradient(soc_i5(), {3.0});
    REQUIRE(gs[0] == Catch::Approx(1.0 / kSqrt2).margin(1e-12));
}

TEST_CASE("Young-Fenchel inequality on random pairs") {
    SplitMix64 rng(77);
    std::vector<ConvexFunctionSpec> fs;
    fs.push_back(abs_minus_one());
    fs.push_back(half_square_minus_one());
    fs.push_back(ellipse_i2());
    fs.push_back(singular_i4());

    for (const auto& f : fs) {
        for (int i = 0; i < 1000; ++i) {
            Vec x = box_point(rng, f.dim(), 4.0);
            Vec y = box_point(rng, f.dim(), 3.0);
            double fy = conjugate(f, y);
            if (!std::isfinite(fy)) continue; // +inf: inequality trivial
            REQUIRE(fy + eval(f, x) >= dot(y, x) - 1e-9 * (1.0 + std::abs(fy)));
        }
    }
}

TEST_CASE("conjugate midpoint convexity") {
    SplitMix64 rng(101);
    std::vector<ConvexFunctionSpec> fs;
    fs.push_back(abs_minus_one());
    fs.push_back(ellipse_i2());

    for (const auto& f : fs) {
        for (int i = 0; i < 300; ++i) {
            Vec y = box_point(rng, f.dim(), 0.9);
            Vec z = box_point(rng, f.dim(), 0.9);
            double fy = conjugate(f, y), fz = conjugate(f, z);
            double fm = conjugate(f, scale(add(y, z), 0.5));
            if (!std::isfinite(fy) || !std::isfinite(fz)) continue;
            REQUIRE(fm <= 0.5 * (fy + fz) + 1e-9);
        }
    }
}

TEST_CASE("Fenchel-Moreau at grid scale") {
    SplitMix64 rng(55);
    auto ma = abs_minus_one();
    for (int i = 0; i < 60; ++i) {
        Vec x = {rng.uniform(-2.0, 2.0)};
        double bi = grid_biconjugate(ma, x, 1.0, 0.01, 6.0, 1e-3);
        REQUIRE(bi == Catch::Approx(eval(ma, x)).margin(2e-2));
    }
    auto q = half_square_minus_one();
    for (int i = 0; i < 40; ++i) {
        Vec x = {rng.uniform(-2.0, 2.0)};
        double bi = grid_biconjugate(q, x, 4.0, 0.01, 8.0, 1e-3);
        REQUIRE(bi == Catch::Approx(eval(q, x)).margin(2e-2));
    }
}

TEST_CASE("max_affine conjugate row limit") {
    std::vector<MaxAffineRow> rows;
    for (int i = 0; i < 13; ++i) rows.push_back({{static_cast<double>(i)}, 0.0});
    auto f = ConvexFunctionSpec::max_affine(rows);
    REQUIRE_THROWS_AS(conjugate(f, Vec{1.0}), TooLarge);
}

TEST_CASE("lambda domain of the scaled conjugate") {
    // single affine row f(x) = x - 1: (lambda f)^* finite only at lambda = y
    auto aff = ConvexFunctionSpec::max_affine({{{1.0}, 1.0}});
    LambdaDomain d = lambda_conjugate_domain(aff, {0.6});
    REQUIRE(d.kind == LambdaDomain::Point);
    REQUIRE(d.lo == Catch::Approx(0.6).margin(1e-12));

    // |x| - 1 at y = 0.5: theta = (0.5 + t, t) reaches every sum >= 0.5
    LambdaDomain d2 = lambda_conjugate_domain(abs_minus_one(), {0.5});
    REQUIRE(d2.kind == LambdaDomain::Interval);
    REQUIRE(d2.lo == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(d2.unbounded_above());

    // nonsingular quadratic: every lambda > 0 admissible
    LambdaDomain d3 = lambda_conjugate_domain(half_square_minus_one(), {0.3});
    REQUIRE(d3.kind == LambdaDomain::All);

    // singular quadratic with b = 0: off-range y is never reachable
    LambdaDomain d4 = lambda_conjugate_domain(singular_i4(), {0.0, 1.0});
    REQUIRE(d4.kind == LambdaDomain::Empty);
    LambdaDomain d5 = lambda_conjugate_domain(singular_i4(), {0.7, 0.0});
    REQUIRE(d5.kind == LambdaDomain::All);
}
