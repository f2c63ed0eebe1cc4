#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "errb/cones.hpp"
#include "errb/rng.hpp"

using namespace errb;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Vec random_point(SplitMix64& rng, std::size_t k, double halfwidth = 4.0) {
    return box_point(rng, k, halfwidth);
}

// random element of K
Vec random_cone_element(SplitMix64& rng, const ConeSpec& K) {
    switch (K.kind()) {
        case ConeKind::Orthant: {
            Vec v(K.k());
            for (auto& x : v) x = rng.uniform(0.0, 3.0);
            return v;
        }
        case ConeKind::SecondOrder: {
            Vec u = gaussian_vec(rng, K.k() - 1);
            double nu = norm2(u);
            double t = nu + rng.uniform(0.0, 2.0);
            Vec v(K.k());
            v[0] = t;
            for (int i = 1; i < K.k(); ++i) v[i] = u[i - 1];
            return v;
        }
        case ConeKind::PolyhedralH: {
            // random point shifted toward the interior witness until it
            // clears every inequality
            Vec y = box_point(rng, K.k(), 2.0);
            for (double s : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
                Vec cand = axpy(y, s, K.interior_point());
                if (in_cone(K, cand)) return cand;
            }
            return scale(K.interior_point(), rng.uniform(0.0, 2.0));
        }
    }
    return zeros(K.k());
}

// dense-grid distance oracles for k <= 3
double grid_dist_minus_cone(const ConeSpec& K, const Vec& y, double hw, double step) {
    double best = kInf;
    std::size_t k = y.size();
    std::vector<double> axis;
    for (double v = -hw; v <= hw + 1e-12; v += step) axis.push_back(v);
    std::vector<std::size_t> idx(k, 0);
    Vec z(k);
    for (;;) {
        for (std::size_t d = 0; d < k; ++d) z[d] = axis[idx[d]];
        if (in_minus_cone(K, z)) best = std::min(best, norm2(sub(y, z)));
        std::size_t d = 0;
        for (; d < k; ++d) {
            if (++idx[d] < axis.size()) break;
            idx[d] = 0;
        }
        if (d == k) break;
    }
    return best;
}

double grid_dist_complement(const ConeSpec& K, const Vec& y, double hw, double step) {
    double best = kInf;
    std::size_t k = y.size();
    std::vector<double> axis;
    for (double v = -hw; v <= hw + 1e-12; v += step) axis.push_back(v);
    std::vector<std::size_t> idx(k, 0);
    Vec z(k);
    for (;;) {
        for (std::size_t d = 0; d < k; ++d) z[d] = axis[idx[d]];
        if (!in_minus_cone(K, z)) best = std::min(best, norm2(sub(y, z)));
        std::size_t d = 0;
        for (; d < k; ++d) {
            if (++idx[d] < axis.size()) break;
            idx[d] = 0;
        }
        if (d == k) break;
    }
    return best;
}

ConeSpec sample_poly_cone() {
    // K = {y in R^2 : y1 >= 0, y1 + y2 >= 0}
    return ConeSpec::polyhedral({{1.0, 0.0}, {1.0, 1.0}});
}

} // namespace

TEST_CASE("membership in -K") {
    auto orth = ConeSpec::orthant(2);
    REQUIRE(in_minus_cone(orth, {-1.0, -2.0}));
    REQUIRE_FALSE(in_minus_cone(orth, {0.5, -2.0}));

    auto soc = ConeSpec::second_order(2);
    REQUIRE(in_minus_cone(soc, {-1.0, 0.0}));
    REQUIRE_FALSE(in_minus_cone(soc, {-1.0, 2.0}));
}

TEST_CASE("cone construction guards") {
    REQUIRE_THROWS_AS(ConeSpec::second_order(1), ConstructionError);
    REQUIRE_THROWS_AS(ConeSpec::polyhedral({{0.0, 0.0}}), ConstructionError);
    // {y : y1 >= 0, -y1 >= 0} is a hyperplane: empty interior
    REQUIRE_THROWS_AS(ConeSpec::polyhedral({{1.0, 0.0}, {-1.0, 0.0}}), ConstructionError);
    auto poly = sample_poly_cone();
    for (const auto& n : poly.rows()) REQUIRE(dot(n, poly.interior_point()) >= 1.0 - 1e-9);
}

TEST_CASE("dist_to_minus_cone closed forms") {
    auto orth = ConeSpec::orthant(2);
    auto r = dist_to_minus_cone(orth, {1.0, -2.0});
    REQUIRE(r.d == Catch::Approx(1.0));
    REQUIRE(r.proj[0] == Catch::Approx(0.0));
    REQUIRE(r.proj[1] == Catch::Approx(-2.0));

    auto soc = ConeSpec::second_order(2);
    auto s = dist_to_minus_cone(soc, {-1.0, 3.0});
    REQUIRE(s.d == Catch::Approx(kSqrt2).margin(1e-12));

    auto inside = dist_to_minus_cone(soc, {-2.0, 1.0});
    REQUIRE(inside.d == 0.0);
    REQUIRE(inside.proj[0] == Catch::Approx(-2.0));
}

TEST_CASE("dist_to_complement closed forms") {
    auto orth = ConeSpec::orthant(2);
    REQUIRE(dist_to_complement(orth, {-2.0, -3.0}) == Catch::Approx(2.0));
    REQUIRE(dist_to_complement(orth, {0.0, -1.0}) == Catch::Approx(0.0));

    auto soc = ConeSpec::second_order(2);
    REQUIRE(dist_to_complement(soc, {-1.0, 0.0}) == Catch::Approx(1.0 / kSqrt2));
}

TEST_CASE("oriented distance values and sides") {
    auto orth = ConeSpec::orthant(2);
    auto out = oriented_distance(orth, {1.0, -2.0});
    REQUIRE(out.value == Catch::Approx(1.0));
    REQUIRE(out.side == ConeSide::outside);

    auto in = oriented_distance(orth, {-2.0, -3.0});
    REQUIRE(in.value == Catch::Approx(-2.0));
    REQUIRE(in.side == ConeSide::inside);

    auto bd = oriented_distance(orth, {0.0, -1.0});
    REQUIRE(bd.value == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(bd.side == ConeSide::boundary);
}

TEST_CASE("delta_subgradient directions and tie rules") {
    auto orth = ConeSpec::orthant(2);
    Vec g1 = delta_subgradient(orth, {1.0, -2.0});
    REQUIRE(g1[0] == Catch::Approx(1.0));
    REQUIRE(g1[1] == Catch::Approx(0.0).margin(1e-12));

    Vec g2 = delta_subgradient(orth, {-2.0, -3.0}); // facet y1 = 0 nearest
    REQUIRE(g2[0] == Catch::Approx(1.0));
    REQUIRE(g2[1] == Catch::Approx(0.0));

    Vec g3 = delta_subgradient(orth, {0.0, -1.0}); // boundary: lowest index
    REQUIRE(g3[0] == Catch::Approx(1.0));
}

TEST_CASE("dual cone membership") {
    auto orth = ConeSpec::orthant(2);
    REQUIRE(in_dual_cone(orth, {1.0, 0.0}));
    REQUIRE_FALSE(in_dual_cone(orth, {-0.1, 1.0}));

    auto soc = ConeSpec::second_order(2);
    REQUIRE_FALSE(in_dual_cone(soc, {1.0, 2.0}));
    REQUIRE(in_dual_cone(soc, {2.0, 1.0}));

    auto poly = sample_poly_cone();
    // K* = cone{(1,0),(1,1)}
    REQUIRE(in_dual_cone(poly, {2.0, 1.0}));
    REQUIRE(in_dual_cone(poly, {1.0, 0.0}));
    REQUIRE_FALSE(in_dual_cone(poly, {0.0, 1.0}));
    REQUIRE_FALSE(in_dual_cone(poly, {-1.0, 0.0}));
}

TEST_CASE("level-set identity, interior strictness, K-decrease, convexity") {
    SplitMix64 rng(314);
    std::vector<ConeSpec> cones;
    cones.push_back(ConeSpec::orthant(3));
    cones.push_back(ConeSpec::second_order(3));
    cones.push_back(sample_poly_cone());

    for (const auto& K : cones) {
        std::size_t k = K.k();
        for (int i = 0; i < 1000; ++i) {
            Vec y = random_point(rng, k);
            auto od = oriented_distance(K, y);
            bool member = in_minus_cone(K, y);
            // sign agreement off the boundary band
            if (std::abs(od.value) > 1e-9) {
                REQUIRE(member == (od.value < 0.0));
            }
            // interior strictness
            if (dist_to_complement(K, y) > 1e-9) REQUIRE(od.value < 0.0);

            // oriented distance decreases along -K directions (equivalently:
            // moving by -k for k in K does not increase Delta)
            Vec kk = random_cone_element(rng, K);
            double before = od.value;
            double after = oriented_distance(K, sub(y, kk)).value;
            REQUIRE(after <= before + 1e-10);

            // midpoint convexity
            Vec z = random_point(rng, k);
            double mid = oriented_distance(K, scale(add(y, z), 0.5)).value;
            double avg = 0.5 * (od.value + oriented_distance(K, z).value);
            REQUIRE(mid <= avg + 1e-9);
        }
    }
}

TEST_CASE("projection optimality against random feasible points") {
    SplitMix64 rng(2718);
    std::vector<ConeSpec> cones;
    cones.push_back(ConeSpec::orthant(3));
    cones.push_back(ConeSpec::second_order(3));
    cones.push_back(sample_poly_cone());

    for (const auto& K : cones) {
        std::size_t k = K.k();
        for (int i = 0; i < 100; ++i) {
            Vec y = random_point(rng, k);
            auto pr = dist_to_minus_cone(K, y);
            REQUIRE(in_minus_cone(K, pr.proj));
            for (int j = 0; j < 10; ++j) {
                Vec z = scale(random_cone_element(rng, K), -1.0);
                REQUIRE(norm2(sub(y, pr.proj)) <= norm2(sub(y, z)) + 1e-8);
            }
        }
    }
}

TEST_CASE("grid oracle agreement for distances (k <= 3)") {
    SplitMix64 rng(99);
    std::vector<ConeSpec> cones;
    cones.push_back(ConeSpec::orthant(2));
    cones.push_back(ConeSpec::second_order(2));
    cones.push_back(sample_poly_cone());

    const double hw = 3.0, step = 0.05;
    for (const auto& K : cones) {
        for (int i = 0; i < 15; ++i) {
            Vec y = random_point(rng, K.k(), 1.5);
            double lib = dist_to_minus_cone(K, y).d;
            double oracle = grid_dist_minus_cone(K, y, hw, step);
            REQUIRE(lib <= oracle + 1e-9);
            REQUIRE(lib >= oracle - step * std::sqrt(2.0));

            double libc = dist_to_complement(K, y);
            double oraclec = grid_dist_complement(K, y, hw, step);
            REQUIRE(libc <= oraclec + 1e-9);
            REQUIRE(libc >= oraclec - step * std::sqrt(2.0));
        }
    }
}

TEST_CASE("oriented distance witness attains the active distance") {
    SplitMix64 rng(55);
    auto soc = ConeSpec::second_order(3);
    for (int i = 0; i < 200; ++i) {
        Vec y = random_point(rng, 3);
        auto od = oriented_distance(soc, y);
        double attained = norm2(sub(y, od.witness));
        REQUIRE(attained == Catch::Approx(std::abs(od.value)).margin(1e-8));
    }
}
