#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dbec/control.hpp"

using namespace dbec;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Fixture {
    SpeciesParams dy = SpeciesParams::dy164();
    ModelParams model = ModelParams::from_species(dy, 1e4);
    UnitSystem units = UnitSystem::um_ms_atom(dy.mass_m);
    ControlEndpoints ep = ControlEndpoints::defaults(units);
    ControlBounds bounds = ControlBounds::defaults(units);
    double T = 2.0;

    double as_in_a0(double a_internal) const {
        return units.length_to_si(a_internal) / PhysicalConstants::bohr_radius_a0;
    }
};

} // namespace

TEST_CASE("default endpoints and bounds reproduce the parameter table") {
    Fixture f;
    CHECK(f.as_in_a0(f.ep.a_s_i) == doctest::Approx(130.0).epsilon(1e-12));
    CHECK(f.as_in_a0(f.ep.a_s_f) == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(f.units.frequency_to_si(f.ep.w_rho_i) / kTwoPi == doctest::Approx(70.0).epsilon(1e-12));
    CHECK(f.units.frequency_to_si(f.ep.w_z_i) / kTwoPi == doctest::Approx(52.5).epsilon(1e-12));
    CHECK(f.ep.w_rho_f == 0.0);
    CHECK(f.ep.w_z_f == 0.0);
    CHECK(f.as_in_a0(f.bounds.a_s_lb) == doctest::Approx(80.0));
    CHECK(f.as_in_a0(f.bounds.a_s_ub) == doctest::Approx(130.0));
    CHECK(f.units.frequency_to_si(f.bounds.w_rho_ub) / kTwoPi == doctest::Approx(318.3));
}

TEST_CASE("free coefficient counts per level are 6, 9, 15, 27") {
    CHECK(coefficients_per_level(1) == 6);
    CHECK(coefficients_per_level(2) == 9);
    CHECK(coefficients_per_level(3) == 15);
    CHECK(coefficients_per_level(4) == 27);
}

TEST_CASE("level-1 Greville coefficients give exact linear ramps") {
    Fixture f;
    const CoefficientVector c = linear_ramp_coefficients(1, f.T);
    REQUIRE(c.size() == 6);
    CHECK(c[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const ControlSet set = assemble_controls(c, 1, f.ep, f.T);
    for (int s = 0; s <= 100; ++s) {
        const double t = f.T * double(s) / 100.0;
        for (int i = 0; i < 3; ++i)
            CHECK(curve_value(set.u(i), t) == doctest::Approx(t / f.T).epsilon(1e-13));
    }
}

TEST_CASE("endpoint conditions hold for every coefficient vector") {
    Fixture f;
    std::mt19937_64 rng(41);
    for (int level = 1; level <= 4; ++level) {
        CoefficientVector c(coefficients_per_level(level));
        for (double& v : c)
            v = 2.0 * double(rng() >> 11) * 0x1.0p-53 - 0.5;
        const ControlSet set = assemble_controls(c, level, f.ep, f.T);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(curve_value(set.u(i), 0.0)) < 1e-13);
            CHECK(std::abs(curve_value(set.u(i), f.T) - 1.0) < 1e-13);
        }
        CHECK(f.as_in_a0(set.at(0.0).a_s) == doctest::Approx(130.0));
        CHECK(f.as_in_a0(set.at(f.T).a_s) == doctest::Approx(80.0));
    }
    CHECK_THROWS_AS(assemble_controls(CoefficientVector(5), 1, f.ep, f.T), ConfigError);
}

TEST_CASE("all-zero coefficients pin the curve at zero until the forced rise") {
    Fixture f;
    const ControlSet set = assemble_controls(CoefficientVector(6, 0.0), 1, f.ep, f.T);
    CHECK(curve_value(set.u(0), 0.0) == 0.0);
    CHECK(curve_value(set.u(0), f.T) == 1.0);
    CHECK(curve_value(set.u(0), 0.5 * f.T) < 0.2);
    for (int s = 0; s <= 50; ++s)
        CHECK(curve_value(set.u(0), f.T * s / 50.0) <= 1.0 + 1e-13);
}

TEST_CASE("coefficient boxes from affine inversion") {
    Fixture f;
    const auto boxes = normalized_control_boxes(f.bounds, f.ep);
    CHECK(boxes[0][0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(boxes[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(boxes[1][0] == doctest::Approx(1.0 - 318.3 / 70.0).epsilon(1e-12));
    CHECK(boxes[1][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(boxes[2][0] == doctest::Approx(1.0 - 318.3 / 52.5).epsilon(1e-12));

    const CoefficientBounds cb = coefficient_bounds(3, f.bounds, f.ep);
    REQUIRE(cb.lower.size() == 15);
    CHECK(cb.lower[0] == boxes[0][0]);
    CHECK(cb.lower[5] == boxes[1][0]);
    CHECK(cb.upper[14] == boxes[2][1]);

    ControlEndpoints bad = f.ep;
    bad.a_s_i = 2.0 * f.bounds.a_s_ub;
    CHECK_THROWS_AS(coefficient_bounds(1, f.bounds, bad), ConfigError);
}

TEST_CASE("in-box coefficients keep trajectories within physical bounds") {
    Fixture f;
    const CoefficientBounds cb = coefficient_bounds(2, f.bounds, f.ep);
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        CoefficientVector c(cb.lower.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double u = double(rng() >> 11) * 0x1.0p-53;
            c[i] = cb.lower[i] + u * (cb.upper[i] - cb.lower[i]);
        }
        const ControlSet set = assemble_controls(c, 2, f.ep, f.T);
        for (int s = 0; s <= 200; ++s) {
            const PhysControls p = set.at(f.T * double(s) / 200.0);
            REQUIRE(p.a_s >= f.bounds.a_s_lb - 1e-12);
            REQUIRE(p.a_s <= f.bounds.a_s_ub + 1e-12);
            REQUIRE(p.w_rho >= f.bounds.w_rho_lb - 1e-12);
            REQUIRE(p.w_rho <= f.bounds.w_rho_ub + 1e-12);
            REQUIRE(p.w_z >= f.bounds.w_z_lb - 1e-12);
            REQUIRE(p.w_z <= f.bounds.w_z_ub + 1e-12);
        }
    }
}

TEST_CASE("sample_controls") {
    Fixture f;
    const ControlSet set = assemble_controls(linear_ramp_coefficients(1, f.T), 1, f.ep, f.T);

    SUBCASE("initial values and derived couplings") {
        const ControlSample s = sample_controls(set, 0.0, f.model);
        CHECK(f.as_in_a0(s.a_s) == doctest::Approx(130.0));
        CHECK(s.w_rho == doctest::Approx(f.ep.w_rho_i));
        CHECK(s.g == doctest::Approx(4.0 * std::numbers::pi * s.a_s * f.model.hbar *
                                     f.model.hbar).epsilon(1e-14));
        // Eq. 9 recomputed independently
        const double add = f.model.a_dd;
        const double expect = (32.0 / 3.0) * s.g *
                              std::sqrt(s.a_s * s.a_s * s.a_s / std::numbers::pi) *
                              (1.0 + 1.5 * (add / s.a_s) * (add / s.a_s));
        CHECK(s.gamma_qf == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("frozen past the horizon") {
        const ControlSample s = sample_controls(set, f.T + 3.0, f.model);
        CHECK(f.as_in_a0(s.a_s) == doctest::Approx(80.0));
        CHECK(s.w_rho == 0.0);
        CHECK(s.w_z == 0.0);
    }
    SUBCASE("negative time is rejected") {
        CHECK_THROWS_AS(sample_controls(set, -0.1, f.model), ConfigError);
    }
    SUBCASE("g is strictly increasing in a_s") {
        double prev = 0.0;
        for (double a = 1e-4; a < 1e-2; a += 1e-4) {
            const double g = f.model.g_of_as(a);
            CHECK(g > prev);
            prev = g;
        }
    }
}

TEST_CASE("sum of sines baseline") {
    Fixture f;
    const int K = 9;

    SUBCASE("zero coefficients give exact linear ramps") {
        const ControlSet set = sum_of_sines_controls(std::vector<double>(3 * K, 0.0), K,
                                                     f.ep, f.T);
        for (int s = 0; s <= 100; ++s) {
            const double t = f.T * s / 100.0;
            CHECK(curve_value(set.u(0), t) == doctest::Approx(t / f.T).epsilon(1e-14));
        }
    }
    SUBCASE("endpoints are independent of the coefficients") {
        std::mt19937_64 rng(47);
        std::vector<double> c(3 * K);
        for (double& v : c)
            v = double(rng() >> 11) * 0x1.0p-53 - 0.5;
        const ControlSet set = sum_of_sines_controls(c, K, f.ep, f.T);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(curve_value(set.u(i), 0.0)) < 1e-13);
            CHECK(std::abs(curve_value(set.u(i), f.T) - 1.0) < 1e-13);
        }
    }
    SUBCASE("single mode peaks at T/2") {
        std::vector<double> c(3 * K, 0.0);
        c[0] = 1e-3;
        const ControlSet set = sum_of_sines_controls(c, K, f.ep, f.T);
        double maxdev = 0.0;
        for (int s = 0; s <= 400; ++s) {
            const double t = f.T * s / 400.0;
            maxdev = std::max(maxdev, std::abs(curve_value(set.u(0), t) - t / f.T));
        }
        CHECK(maxdev == doctest::Approx(1e-3).epsilon(1e-10));
        CHECK(std::abs(curve_value(set.u(0), 0.5 * f.T) - 0.5) ==
              doctest::Approx(1e-3).epsilon(1e-12));
    }
}

TEST_CASE("perturbed controls") {
    Fixture f;
    const ControlSet base = assemble_controls(linear_ramp_coefficients(2, f.T), 2, f.ep, f.T);
    const double dt = 0.005;

    SUBCASE("degenerate perturbation reproduces the base controls") {
        const PerturbedControls p(base, {}, 0.0, 7, dt, f.T);
        for (double t : {0.0, 0.37, 1.0, 1.99, 2.0, 3.0}) {
            const PhysControls a = p.at(t), b = base.at(t);
            CHECK(a.a_s == doctest::Approx(b.a_s).epsilon(1e-15));
            CHECK(a.w_rho == doctest::Approx(b.w_rho).epsilon(1e-15));
            CHECK(a.w_z == doctest::Approx(b.w_z).epsilon(1e-15));
        }
    }
    SUBCASE("endpoint factors from the reference list") {
        const PerturbedControls p(base, {1.03, 0.97, 1.03, 0.97}, 0.0, 7, dt, f.T);
        CHECK(f.as_in_a0(p.at(0.0).a_s) == doctest::Approx(1.03 * 130.0).epsilon(1e-12));
        CHECK(f.as_in_a0(p.at(f.T).a_s) == doctest::Approx(0.97 * 80.0).epsilon(1e-12));
        CHECK(p.at(0.0).w_rho == doctest::Approx(1.03 * f.ep.w_rho_i).epsilon(1e-12));
        CHECK(p.at(0.0).w_z == doctest::Approx(0.97 * f.ep.w_z_i).epsilon(1e-12));
    }
    SUBCASE("equal seeds give bitwise-identical samples") {
        const PerturbedControls a(base, {1.03, 0.97, 1.03, 0.97}, 0.03, 99, dt, f.T);
        const PerturbedControls b(base, {1.03, 0.97, 1.03, 0.97}, 0.03, 99, dt, f.T);
        const PerturbedControls c(base, {1.03, 0.97, 1.03, 0.97}, 0.03, 100, dt, f.T);
        bool any_diff = false;
        for (int s = 0; s <= 400; ++s) {
            const double t = s * dt;
            CHECK(a.at(t).a_s == b.at(t).a_s);
            CHECK(a.at(t).w_rho == b.at(t).w_rho);
            any_diff |= (a.at(t).a_s != c.at(t).a_s);
        }
        CHECK(any_diff);
    }
}

TEST_CASE("refined coefficients reproduce the coarse trajectories") {
    Fixture f;
    std::mt19937_64 rng(53);
    CoefficientVector c2(coefficients_per_level(2));
    for (double& v : c2)
        v = double(rng() >> 11) * 0x1.0p-53;
    const ControlSet coarse = assemble_controls(c2, 2, f.ep, f.T);

    // refine each curve and rebuild at level 3
    CoefficientVector c3;
    for (int i = 0; i < 3; ++i) {
        const auto& cur = std::get<BSplineCurve>(coarse.u(i));
        const BSplineCurve fine = refine_curve(cur, open_uniform_knots(3, f.T));
        for (std::size_t m = 1; m + 1 < fine.coeffs.size(); ++m)
            c3.push_back(fine.coeffs[m]);
    }
    const ControlSet fine = assemble_controls(c3, 3, f.ep, f.T);
    for (int s = 0; s <= 500; ++s) {
        const double t = f.T * s / 500.0;
        const PhysControls a = coarse.at(t), b = fine.at(t);
        CHECK(std::abs(a.a_s - b.a_s) < 1e-12 * f.ep.a_s_i);
        CHECK(std::abs(a.w_rho - b.w_rho) < 1e-12 * f.ep.w_rho_i);
    }
}
