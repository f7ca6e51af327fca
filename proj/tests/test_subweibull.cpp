#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "opfix/subweibull.hpp"

using namespace opfix;

TEST_CASE("c_of_theta known values") {
    CHECK(c_of_theta(0.0) == 1.0);
    CHECK(c_of_theta(1.0) == doctest::Approx(2.0 * M_E).epsilon(1e-14));
    // (2e/0.5)^0.5 = sqrt(4e)
    CHECK(c_of_theta(0.5) == doctest::Approx(3.2974425414002564).epsilon(1e-14));
    CHECK(c_of_theta(2.0) == doctest::Approx(M_E * M_E).epsilon(1e-14));
    CHECK_THROWS_AS(c_of_theta(-0.1), std::invalid_argument);
}

TEST_CASE("hp_bound oracle values") {
    // theta = 1, nu = 1, delta = 2/e^2: log(2/delta) = 2, so 2 * c(1) = 4e.
    CHECK(hp_bound({1.0, 1.0}, 2.0 / (M_E * M_E)) ==
          doctest::Approx(4.0 * M_E).epsilon(1e-14));
    // theta = 1/2, nu = 2, delta = 0.05: sqrt(log 40) * sqrt(4e) * 2.
    CHECK(hp_bound({0.5, 2.0}, 0.05) ==
          doctest::Approx(12.666436902298189).epsilon(1e-13));
    // theta = 0: the tail exponent drops out entirely.
    CHECK(hp_bound({0.0, 3.0}, 0.01) == 3.0);
    CHECK(hp_bound(SubWeibullParams::zero(), 0.5) == 0.0);
    CHECK_THROWS_AS(hp_bound({0.5, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hp_bound({0.5, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("hp_bound is nonincreasing in delta") {
    double last = std::numeric_limits<double>::infinity();
    for (double delta : {0.001, 0.01, 0.1, 0.5, 0.9}) {
        const double value = hp_bound({0.8, 1.5}, delta);
        CHECK(value < last);
        last = value;
    }
}

TEST_CASE("scaling rule") {
    const SubWeibullParams p{0.7, 1.3};
    const SubWeibullParams scaled = sw_scale(p, -2.0);
    CHECK(scaled.theta == 0.7);
    CHECK(scaled.nu == doctest::Approx(2.6).epsilon(1e-15));
    CHECK(sw_scale(p, 0.0).is_zero());
    CHECK(sw_scale(SubWeibullParams::zero(), 5.0).is_zero());
    CHECK_THROWS_AS(sw_scale(p, std::nan("")), std::invalid_argument);
}

TEST_CASE("sum rule takes max tail and adds scales") {
    const SubWeibullParams s = sw_sum({0.5, 1.0}, {1.25, 2.0});
    CHECK(s.theta == 1.25);
    CHECK(s.nu == 3.0);
    // Zero sentinel is the identity.
    const SubWeibullParams p{0.5, 1.5};
    CHECK(sw_sum(p, SubWeibullParams::zero()) == p);
    CHECK(sw_sum(SubWeibullParams::zero(), p) == p);
}

TEST_CASE("product rules") {
    const SubWeibullParams indep = sw_product({0.5, 1.0}, {1.25, 2.0}, true);
    CHECK(indep.theta == 1.75);
    CHECK(indep.nu == 2.0);

    // Dependent: (1,2) x (1,3) -> theta 2, nu = (2^2 / (1 * 1)) * 6 = 24.
    const SubWeibullParams dep = sw_product({1.0, 2.0}, {1.0, 3.0}, false);
    CHECK(dep.theta == 2.0);
    CHECK(dep.nu == doctest::Approx(24.0).epsilon(1e-13));

    // Dependent product with a theta = 0 factor: theta^theta -> 1 at zero.
    const SubWeibullParams dep0 = sw_product({0.0, 2.0}, {1.0, 3.0}, false);
    CHECK(dep0.theta == 1.0);
    CHECK(dep0.nu == doctest::Approx(6.0).epsilon(1e-13));

    CHECK(sw_product({0.5, 1.0}, SubWeibullParams::zero(), true).is_zero());
}

TEST_CASE("power rule") {
    const SubWeibullParams sq = sw_power({0.5, 1.0}, 2.0);
    CHECK(sq.theta == 1.0);
    CHECK(sq.nu == doctest::Approx(2.0).epsilon(1e-14));  // 2^{2*0.5}

    // a < 1 keeps the max() at one.
    const SubWeibullParams root = sw_power({1.0, 3.0}, 0.5);
    CHECK(root.theta == 0.5);
    CHECK(root.nu == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(sw_power({0.5, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sw_power({0.5, 1.0}, -1.0), std::invalid_argument);
}

TEST_CASE("centering doubles the scale") {
    const SubWeibullParams c = sw_center({0.5, 1.0});
    CHECK(c.theta == 0.5);
    CHECK(c.nu == 2.0);
    CHECK(sw_center(SubWeibullParams::zero()).is_zero());
}

TEST_CASE("bounded variables are sub-Gaussian with scale width/sqrt(2)") {
    const SubWeibullParams b = sw_bounded(-1.0, 3.0);
    CHECK(b.theta == 0.5);
    CHECK(b.nu == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(sw_bounded(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sw_bounded(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("vector norm rule") {
    const SubWeibullParams v = sw_vector_norm({0.5, 1.0}, 4);
    CHECK(v.theta == 0.5);
    CHECK(v.nu == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(sw_vector_norm({0.5, 1.0}, 1).nu ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(sw_vector_norm({0.5, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate(SubWeibullParams{-0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(SubWeibullParams{0.5, -1.0}), std::invalid_argument);
    CHECK_NOTHROW(validate(SubWeibullParams{0.0, 0.0}));  // zero sentinel
    CHECK_NOTHROW(validate(SubWeibullParams{0.0, 2.0}));
}

TEST_CASE("hp_bound grows with theta at fixed small delta") {
    // Heavier declared tails cost more at high confidence.
    const double delta = 1e-4;
    CHECK(hp_bound({0.5, 1.0}, delta) < hp_bound({1.0, 1.0}, delta));
    CHECK(hp_bound({1.0, 1.0}, delta) < hp_bound({2.0, 1.0}, delta));
}
