#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stlpi/funnels.hpp"

#include <cmath>

using namespace stlpi;

TEST_CASE("xi examples") {
    Funnel f = Funnel::constant(3, -5.0, 0.2, -7.0, AdaptMode::Frozen);
    CHECK(xi(f, -5.0, 0) == doctest::Approx(1.0));
    CHECK(xi(f, 0.2, 1) == doctest::Approx(0.0));
    CHECK(xi(f, -1.0, 2) == doctest::Approx(1.2 / 5.2));
    // above Gamma -> negative, below gamma -> > 1
    CHECK(xi(f, 1.0, 0) < 0.0);
    CHECK(xi(f, -6.0, 0) > 1.0);
}

TEST_CASE("xi is invariant under a common shift of gamma, Gamma and rho") {
    GainParams p;
    for (double shift : {-3.0, 0.7, 12.5}) {
        Funnel a = Funnel::constant(1, -5.0, 0.2, -7.0, AdaptMode::Frozen);
        Funnel b = Funnel::constant(1, -5.0 + shift, 0.2 + shift, -7.0 + shift,
                                    AdaptMode::Frozen);
        for (double rho : {-4.0, -1.0, 0.1}) {
            CHECK(std::abs(xi(a, rho, 0) - xi(b, rho + shift, 0)) <= 1e-12);
        }
    }
    (void)p;
}

TEST_CASE("kappa examples with the default parameters") {
    GainParams p; // m=0.8, theta1=2.4, theta2=24
    CHECK(kappa(p, -0.5) == 0.0);
    CHECK(kappa(p, 0.0) == 0.0);
    CHECK(kappa(p, 1.0) == doctest::Approx(2.0));
    // one-sided limit at 0+ is the tiny sigmoid tail
    double tail = kappa(p, 1e-12);
    CHECK(tail > 0.0);
    CHECK(tail < 1e-9);
    CHECK(kappa(p, 1e-12) == doctest::Approx(2.4 / (1.0 + std::exp(24.0))).epsilon(1e-6));
}

TEST_CASE("kappa is non-decreasing and approaches m*xi + theta1") {
    GainParams p;
    double prev = 0.0;
    for (double x = 0.0; x <= 5.0; x += 1e-3) {
        double k = kappa(p, x);
        CHECK(k >= prev);
        prev = k;
    }
    double x = 50.0;
    CHECK(kappa(p, x) == doctest::Approx(p.m * x + p.theta1).epsilon(1e-12));
}

TEST_CASE("Funnel::constant and validate") {
    Funnel f = Funnel::constant(4, -4.0, 0.1, -7.0, AdaptMode::GammaOnlyFixedGamma);
    REQUIRE(f.grid_size() == 4);
    CHECK(f.gamma[3] == -4.0);
    CHECK(f.Gamma[0] == 0.1);
    CHECK(f.gamma_lim[2] == -7.0);
    CHECK(f.mode == AdaptMode::GammaOnlyFixedGamma);
    CHECK_NOTHROW(f.validate());

    // separation below the minimum is rejected (constant() validates)
    CHECK_THROWS(Funnel::constant(2, 0.0, 1e-9, -1.0, AdaptMode::Frozen));

    // floor above gamma is rejected
    CHECK_THROWS(Funnel::constant(2, -1.0, 0.5, 0.0, AdaptMode::Frozen));

    // hand-built violations caught by validate()
    Funnel bad = f;
    bad.gamma[1] = bad.Gamma[1];
    CHECK_THROWS(bad.validate());

    // mismatched curve lengths are rejected
    Funnel bad3 = f;
    bad3.Gamma.pop_back();
    CHECK_THROWS(bad3.validate());
}
