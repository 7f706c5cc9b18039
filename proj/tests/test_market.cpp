#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "refprice/market.hpp"
#include "test_support.hpp"

using namespace refprice;
using testsupport::example1;

TEST_CASE("demand evaluates the linear model") {
    auto params = example1();
    // direct evaluation: 5 - 2*1.4127 + 0.4*1.2803 + 0.1*1.3862
    CHECK(demand(params, Firm::one, 1.4127, 1.2803, 1.3862) ==
          doctest::Approx(2.82534).epsilon(1e-9));
    // 6 - 3*1 + 0.7*1 + 0.5*1.5
    CHECK(demand(params, Firm::two, 1.0, 1.0, 1.5) == doctest::Approx(4.45).epsilon(1e-12));
}

TEST_CASE("demand is linear term by term") {
    auto params = example1();
    const double base = demand(params, Firm::one, 1.5, 1.0, 1.2);
    CHECK(demand(params, Firm::one, 1.5 + 0.25, 1.0, 1.2) - base ==
          doctest::Approx(-params.beta(Firm::one) * 0.25));
    CHECK(demand(params, Firm::one, 1.5, 1.0 + 0.5, 1.2) - base ==
          doctest::Approx(params.delta(Firm::one) * 0.5));
    CHECK(demand(params, Firm::one, 1.5, 1.0, 1.2 + 0.5) - base ==
          doctest::Approx(params.gamma(Firm::one) * 0.5));
}

TEST_CASE("demand rejects out-of-box prices") {
    auto params = example1();
    CHECK_THROWS_AS(demand(params, Firm::one, 0.5, 1.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(demand(params, Firm::one, 1.5, 2.5, 1.5), std::domain_error);
    CHECK_THROWS_AS(demand(params, Firm::one, 1.5, 1.0, 0.0), std::domain_error);
}

TEST_CASE("revenue is price times demand") {
    auto params = example1();
    CHECK(revenue(params, Firm::two, 1.0, 1.0, 1.5) == doctest::Approx(4.45).epsilon(1e-12));
    // At the point (1.4127, 1.2803, 1.3862): p1 * d1 = 1.4127 * 2.82534
    CHECK(revenue(params, Firm::one, 1.4127, 1.2803, 1.3862) ==
          doctest::Approx(1.4127 * 2.82534).epsilon(1e-8));

    // zero demand at the box corner gives zero revenue
    MarketParams corner({1.5, 1.5}, {1, 1}, {0.25, 0.25}, {0.25, 0.25}, {0.5, 0.5},
                        0.4, 1.0, 2.0);
    CHECK(demand(corner, Firm::one, 2.0, 1.0, 1.0) == doctest::Approx(0.0));
    CHECK(revenue(corner, Firm::one, 2.0, 1.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("gradient matches the analytic first-order oracle") {
    auto params = example1();
    // 2*2*1 - (5 + 0.4 + 0.15)
    CHECK(gradient(params, Firm::one, 1.0, 1.0, 1.5) == doctest::Approx(-1.55).epsilon(1e-12));

    SUBCASE("symmetric market gives symmetric gradients") {
        MarketParams sym({5, 5}, {2, 2}, {0.4, 0.4}, {0.1, 0.1}, {0.5, 0.5}, 0.4, 1.0, 2.0);
        CHECK(gradient(sym, Firm::one, 1.3, 1.3, 1.5) ==
              gradient(sym, Firm::two, 1.3, 1.3, 1.5));
    }

    SUBCASE("affine in own price with slope 2*beta") {
        const double h = 0.125;
        const double diff = gradient(params, Firm::one, 1.5 + h, 1.0, 1.2) -
                            gradient(params, Firm::one, 1.5, 1.0, 1.2);
        CHECK(diff == doctest::Approx(2.0 * params.beta(Firm::one) * h).epsilon(1e-14));
    }

    SUBCASE("central difference of revenue reproduces the gradient") {
        // revenue is quadratic in own price, so the central difference is
        // exact up to rounding for any h
        for (double h : {1e-3, 1e-2, 0.1}) {
            const double fd = -(revenue(params, Firm::one, 1.5 + h, 1.2, 1.3) -
                                revenue(params, Firm::one, 1.5 - h, 1.2, 1.3)) /
                              (2.0 * h);
            CHECK(fd == doctest::Approx(gradient(params, Firm::one, 1.5, 1.2, 1.3))
                            .epsilon(1e-9));
        }
    }
}

TEST_CASE("nature gradient vanishes exactly at the stability condition") {
    auto params = example1();
    const double p1 = 1.4, p2 = 1.2;
    const double r = params.theta(Firm::one) * p1 + params.theta(Firm::two) * p2;
    CHECK(nature_gradient(params, p1, p2, r) == doctest::Approx(0.0));
    CHECK(nature_gradient(params, 1.0, 1.0, 1.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reference update is the exponential-smoothing recursion") {
    auto params = example1();
    CHECK(reference_update(params, 1.5, 1.0, 1.0) == doctest::Approx(1.2).epsilon(1e-14));

    SUBCASE("weighted price average is a fixed point") {
        const double r = params.theta(Firm::one) * 1.3 + params.theta(Firm::two) * 1.7;
        CHECK(reference_update(params, r, 1.3, 1.7) == doctest::Approx(r).epsilon(1e-14));
    }

    SUBCASE("a = 1/2 gives the midpoint") {
        MarketParams half({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2}, 0.5, 1.0, 2.0);
        // r = 2, price average 1 -> midpoint 1.5
        CHECK(reference_update(half, 2.0, 1.0, 1.0) == doctest::Approx(1.5));
    }

    SUBCASE("output stays between the inputs (convex combination)") {
        for (double r = 1.0; r <= 2.0; r += 0.25)
            for (double p1 = 1.0; p1 <= 2.0; p1 += 0.25)
                for (double p2 = 1.0; p2 <= 2.0; p2 += 0.25) {
                    const double out = reference_update(params, r, p1, p2);
                    CHECK(out >= std::min({r, p1, p2}) - 1e-15);
                    CHECK(out <= std::max({r, p1, p2}) + 1e-15);
                }
    }
}

TEST_CASE("project clamps onto the box") {
    auto params = example1();
    CHECK(project(params, 1.5) == 1.5);
    CHECK(project(params, 0.3) == 1.0);
    CHECK(project(params, 7.0) == 2.0);
}

TEST_CASE("surcharge form is the same demand") {
    auto params = example1();
    CHECK(surcharge_form_demand(params, Firm::one, 1.4127, 1.2803, 1.3862) ==
          doctest::Approx(2.82534).epsilon(1e-9));

    SUBCASE("r = p_i drops the surcharge term") {
        const double p = 1.3, q = 1.6;
        const double expect = params.alpha(Firm::one) -
                              (params.beta(Firm::one) - params.gamma(Firm::one)) * p +
                              params.delta(Firm::one) * q;
        CHECK(surcharge_form_demand(params, Firm::one, p, q, p) ==
              doctest::Approx(expect).epsilon(1e-14));
    }

    SUBCASE("identity against demand on a box grid") {
        int checked = 0;
        for (double p = 1.0; p <= 2.0; p += 0.1)
            for (double q = 1.0; q <= 2.0; q += 0.1)
                for (double r = 1.0; r <= 2.0; r += 0.1)
                    for (Firm i : {Firm::one, Firm::two}) {
                        CHECK(std::abs(surcharge_form_demand(params, i, p, q, r) -
                                       demand(params, i, p, q, r)) < 1e-12);
                        ++checked;
                    }
        CHECK(checked >= 1000);
    }
}

TEST_CASE("construction rejects invalid parameter sets") {
    auto valid = [] {
        return MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2}, 0.4, 1.0, 2.0);
    };
    CHECK_NOTHROW(valid());

    CHECK_THROWS_WITH_AS(MarketParams({-5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("alpha_1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, -3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("beta_2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.0, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("delta_1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, -0.5}, {0.8, 0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("gamma_2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.3},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("theta_1 + theta_2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {1.2, -0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("theta"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      1.0, 1.0, 2.0),
                         doctest::Contains("(0,1)"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 0.0, 2.0),
                         doctest::Contains("p_lo"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 2.0, 1.0),
                         doctest::Contains("p_hi"), std::invalid_argument);
    // demand would go negative at the corner (alpha_1 too small for this box)
    CHECK_THROWS_WITH_AS(MarketParams({1, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                      0.4, 1.0, 2.0),
                         doctest::Contains("corner"), std::invalid_argument);
}

TEST_CASE("sensitivity margin m derives as the binding ratio") {
    auto params = example1();
    // min(2/0.5, 3/1.2)
    CHECK(params.m() == doctest::Approx(2.5).epsilon(1e-15));

    SUBCASE("explicit smaller m is accepted") {
        MarketParams explicit_m({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2}, 0.4,
                                1.0, 2.0, 2.0);
        CHECK(explicit_m.m() == 2.0);
    }
    SUBCASE("explicit m above the binding ratio is rejected") {
        CHECK_THROWS_WITH_AS(MarketParams({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2},
                                          0.4, 1.0, 2.0, 3.0),
                             doctest::Contains("m"), std::invalid_argument);
    }
    SUBCASE("accepted sets have nonnegative demand at the minimizing corner") {
        testsupport::RandomMarketGen gen(20240531);
        for (int k = 0; k < 50; ++k) {
            const auto p = gen.next();
            CHECK(demand(p, Firm::one, p.p_hi(), p.p_lo(), p.p_lo()) >= 0.0);
            CHECK(demand(p, Firm::two, p.p_hi(), p.p_lo(), p.p_lo()) >= 0.0);
        }
    }
}
