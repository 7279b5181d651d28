#include <doctest.h>

#include <cmath>
#include <random>

#include "dbec/bspline.hpp"
#include "oracles.hpp"

using namespace dbec;

TEST_CASE("degree-0 basis functions are span indicators") {
    KnotVector kv;
    kv.degree = 0;
    kv.knots = {0.0, 0.25, 0.5, 0.75, 1.0};
    CHECK(basis_eval(kv, 1, 0.3) == 1.0);
    CHECK(basis_eval(kv, 1, 0.25) == 1.0);
    CHECK(basis_eval(kv, 1, 0.5) == 0.0);
    CHECK(basis_eval(kv, 0, 0.3) == 0.0);
}

TEST_CASE("knot ladder levels 1..4") {
    const double T = 2.0;
    const KnotVector k1 = open_uniform_knots(1, T);
    CHECK(k1.knots.size() == 8);
    CHECK(k1.basis_count() == 4);
    const KnotVector k2 = open_uniform_knots(2, T);
    CHECK(k2.knots == std::vector<double>{0, 0, 0, 0, T / 2, T, T, T, T});
    CHECK(k2.basis_count() == 5);
    const KnotVector k3 = open_uniform_knots(3, T);
    CHECK(k3.knots == std::vector<double>{0, 0, 0, 0, T / 4, T / 2, 3 * T / 4, T, T, T, T});
    CHECK(k3.basis_count() == 7);
    const KnotVector k4 = open_uniform_knots(4, T);
    CHECK(k4.knots.size() == 15);
    CHECK(k4.basis_count() == 11);
    CHECK_THROWS_AS(open_uniform_knots(5, T), ConfigError);
    CHECK_THROWS_AS(open_uniform_knots(0, T), ConfigError);
    // extension beyond 4 behind the explicit flag, dyadic interior knots
    const KnotVector k5 = open_uniform_knots(5, T, true);
    CHECK(k5.basis_count() == 19);
}

TEST_CASE("partition of unity, non-negativity, local support") {
    std::mt19937_64 rng(17);
    for (int level = 1; level <= 4; ++level) {
        const KnotVector kv = open_uniform_knots(level, 2.0);
        const int K = kv.basis_count();
        for (int s = 0; s < 2500; ++s) {
            const double t = 2.0 * double(rng() >> 11) * 0x1.0p-53;
            double sum = 0.0;
            for (int k = 0; k < K; ++k) {
                const double v = basis_eval(kv, k, t);
                REQUIRE(v >= -1e-15);
                // local support: exactly zero outside [xi_k, xi_{k+p+1}]
                if (t < kv.knots[k] || t > kv.knots[k + kv.degree + 1])
                    REQUIRE(v == 0.0);
                sum += v;
            }
            REQUIRE(std::abs(sum - 1.0) < 1e-13);
        }
        // right endpoint: the last basis function carries the value 1
        CHECK(basis_eval(kv, K - 1, 2.0) == 1.0);
        CHECK(basis_eval(kv, K - 2, 2.0) == 0.0);
    }
}

TEST_CASE("basis values match the de Boor oracle") {
    const KnotVector kv = open_uniform_knots(2, 2.0);
    const int K = kv.basis_count();
    for (int k = 0; k < K; ++k) {
        std::vector<double> unit(K, 0.0);
        unit[k] = 1.0;
        for (double t : {0.0, 0.3, 1.0, 1.5, 1.999, 2.0}) {
            const double a = basis_eval(kv, k, t);
            const double b = oracle::de_boor_eval(kv, unit, t);
            CHECK(a == doctest::Approx(b).epsilon(1e-14));
        }
    }
}

TEST_CASE("curve evaluation") {
    const KnotVector kv = open_uniform_knots(3, 2.0);
    const int K = kv.basis_count();

    SUBCASE("constant coefficients give the constant curve") {
        BSplineCurve c{kv, std::vector<double>(K, 0.7)};
        for (double t : {0.0, 0.1, 0.77, 1.5, 2.0})
            CHECK(curve_eval(c, t) == doctest::Approx(0.7).epsilon(1e-14));
    }
    SUBCASE("endpoint interpolation") {
        std::vector<double> coeffs(K, 0.0);
        coeffs.back() = 1.0;
        BSplineCurve c{kv, coeffs};
        CHECK(curve_eval(c, 0.0) == 0.0);
        CHECK(curve_eval(c, 2.0) == 1.0);
    }
    SUBCASE("random coefficients agree with the de Boor oracle") {
        std::mt19937_64 rng(23);
        std::vector<double> coeffs(K);
        for (double& v : coeffs)
            v = 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0;
        BSplineCurve c{kv, coeffs};
        for (int s = 0; s <= 1000; ++s) {
            const double t = 2.0 * double(s) / 1000.0;
            CHECK(curve_eval(c, t) ==
                  doctest::Approx(oracle::de_boor_eval(kv, coeffs, t)).epsilon(1e-13));
        }
    }
    SUBCASE("convex hull on dense samples") {
        std::mt19937_64 rng(29);
        std::vector<double> coeffs(K);
        for (double& v : coeffs)
            v = double(rng() >> 11) * 0x1.0p-53;
        const double lo = *std::min_element(coeffs.begin(), coeffs.end());
        const double hi = *std::max_element(coeffs.begin(), coeffs.end());
        BSplineCurve c{kv, coeffs};
        for (int s = 0; s <= 2000; ++s) {
            const double v = curve_eval(c, 2.0 * double(s) / 2000.0);
            CHECK(v >= lo - 1e-13);
            CHECK(v <= hi + 1e-13);
        }
    }
    SUBCASE("out-of-span evaluation is rejected") {
        BSplineCurve c{kv, std::vector<double>(K, 0.0)};
        CHECK_THROWS_AS(curve_eval(c, -0.1), ConfigError);
        CHECK_THROWS_AS(curve_eval(c, 2.1), ConfigError);
    }
}

TEST_CASE("Greville points") {
    const double T = 3.0;
    SUBCASE("level 1 gives {0, T/3, 2T/3, T}") {
        const std::vector<double> g = greville_points(open_uniform_knots(1, T));
        REQUIRE(g.size() == 4);
        CHECK(g[0] == 0.0);
        CHECK(g[1] == doctest::Approx(T / 3));
        CHECK(g[2] == doctest::Approx(2 * T / 3));
        CHECK(g[3] == T);
    }
    SUBCASE("counts and endpoints at every ladder level") {
        for (int level = 1; level <= 4; ++level) {
            const KnotVector kv = open_uniform_knots(level, T);
            const std::vector<double> g = greville_points(kv);
            CHECK(int(g.size()) == kv.basis_count());
            CHECK(g.front() == 0.0);
            CHECK(g.back() == T);
            CHECK(std::is_sorted(g.begin(), g.end()));
        }
    }
}

TEST_CASE("exact refinement between ladder levels") {
    const double T = 2.0;

    SUBCASE("constant curve stays constant at every level") {
        BSplineCurve c{open_uniform_knots(1, T), std::vector<double>(4, 0.42)};
        for (int level = 2; level <= 4; ++level) {
            c = refine_curve(c, open_uniform_knots(level, T));
            for (double v : c.coeffs)
                CHECK(v == doctest::Approx(0.42).epsilon(1e-13));
        }
    }
    SUBCASE("a level-2 curve re-expressed on level 3 is the same function") {
        std::mt19937_64 rng(31);
        BSplineCurve c2{open_uniform_knots(2, T), {}};
        c2.coeffs.resize(5);
        for (double& v : c2.coeffs)
            v = double(rng() >> 11) * 0x1.0p-53;
        const BSplineCurve c3 = refine_curve(c2, open_uniform_knots(3, T));
        for (int s = 0; s <= 1000; ++s) {
            const double t = T * double(s) / 1000.0;
            CHECK(std::abs(curve_eval(c3, t) - curve_eval(c2, t)) < 1e-12);
        }
    }
    SUBCASE("collocation refinement agrees with knot insertion") {
        std::mt19937_64 rng(37);
        for (int level = 1; level < 4; ++level) {
            BSplineCurve c{open_uniform_knots(level, T), {}};
            c.coeffs.resize(open_uniform_knots(level, T).basis_count());
            for (double& v : c.coeffs)
                v = 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0;
            const KnotVector target = open_uniform_knots(level + 1, T);
            const BSplineCurve a = refine_curve(c, target);
            const BSplineCurve b = oracle::knot_insertion_refine(c, target);
            REQUIRE(a.coeffs.size() == b.coeffs.size());
            for (std::size_t i = 0; i < a.coeffs.size(); ++i)
                CHECK(a.coeffs[i] == doctest::Approx(b.coeffs[i]).epsilon(1e-12));
        }
    }
    SUBCASE("non-nested target is rejected") {
        BSplineCurve c{open_uniform_knots(2, T), std::vector<double>(5, 0.0)};
        CHECK_THROWS_AS(refine_curve(c, open_uniform_knots(2, 1.5)), ConfigError);
    }
}
