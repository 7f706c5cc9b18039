#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "refprice/equilibrium.hpp"
#include "test_support.hpp"

using namespace refprice;
using testsupport::example1;

TEST_CASE("closed-form SNE reproduces the reference market") {
    auto params = example1();
    auto sne = sne_closed_form(params);

    CHECK(sne.interior);
    CHECK(std::round(sne.p1_star * 100) / 100 == doctest::Approx(1.41));
    CHECK(std::round(sne.p2_star * 100) / 100 == doctest::Approx(1.28));
    CHECK(std::round(sne.r_star * 100) / 100 == doctest::Approx(1.39));

    // stationarity and first-order conditions
    CHECK(std::abs(sne.r_star - (0.8 * sne.p1_star + 0.2 * sne.p2_star)) < 1e-12);
    CHECK(std::abs(gradient(params, Firm::one, sne.p1_star, sne.p2_star, sne.r_star)) < 1e-10);
    CHECK(std::abs(gradient(params, Firm::two, sne.p1_star, sne.p2_star, sne.r_star)) < 1e-10);
    CHECK(std::abs(nature_gradient(params, sne.p1_star, sne.p2_star, sne.r_star)) < 1e-12);

    // against the independent linear-system oracle
    auto oracle = testsupport::sne_oracle(params);
    CHECK(sne.p1_star == doctest::Approx(oracle[0]).epsilon(1e-12));
    CHECK(sne.p2_star == doctest::Approx(oracle[1]).epsilon(1e-12));
    CHECK(sne.r_star == doctest::Approx(oracle[2]).epsilon(1e-12));

    // each firm's best response at the equilibrium is its own price
    CHECK(best_response(params, Firm::one, sne.p2_star, sne.r_star) ==
          doctest::Approx(sne.p1_star).epsilon(1e-14));
    CHECK(best_response(params, Firm::two, sne.p1_star, sne.r_star) ==
          doctest::Approx(sne.p2_star).epsilon(1e-14));
}

TEST_CASE("fully symmetric firms share one equilibrium price") {
    MarketParams sym({5, 5}, {2, 2}, {0.4, 0.4}, {0.1, 0.1}, {0.5, 0.5}, 0.4, 1.0, 2.0);
    auto sne = sne_closed_form(sym);
    CHECK(sne.p1_star == doctest::Approx(sne.p2_star).epsilon(1e-14));
    CHECK(sne.r_star == doctest::Approx(sne.p1_star).epsilon(1e-14));
}

TEST_CASE("closed form agrees with the elimination oracle on random markets") {
    testsupport::RandomMarketGen gen(7);
    int interior_seen = 0;
    for (int k = 0; k < 100; ++k) {
        const auto params = gen.next();
        const auto sne = sne_closed_form(params);
        const auto oracle = testsupport::sne_oracle(params);
        CHECK(std::abs(sne.p1_star - oracle[0]) < 1e-10);
        CHECK(std::abs(sne.p2_star - oracle[1]) < 1e-10);
        CHECK(std::abs(sne.r_star - oracle[2]) < 1e-10);
        if (sne.interior) {
            ++interior_seen;
            CHECK(std::abs(gradient(params, Firm::one, sne.p1_star, sne.p2_star, sne.r_star)) <
                  1e-10);
            CHECK(std::abs(gradient(params, Firm::two, sne.p1_star, sne.p2_star, sne.r_star)) <
                  1e-10);
            CHECK(std::abs(nature_gradient(params, sne.p1_star, sne.p2_star, sne.r_star)) <
                  1e-12);
        }
    }
    CHECK(interior_seen >= 100); // the generator back-solves interior targets
}

TEST_CASE("best response clamps the unconstrained maximizer") {
    auto params = example1();
    // (5 + 0.4*1.18 + 0.1*1.20)/4
    CHECK(best_response(params, Firm::one, 1.18, 1.20) ==
          doctest::Approx(1.398).epsilon(1e-12));

    SUBCASE("upper clamp when the maximizer leaves the box") {
        MarketParams high({4, 4}, {1, 1}, {0.1, 0.1}, {0.1, 0.1}, {0.5, 0.5}, 0.4, 1.0, 2.0);
        // (4 + 0.1 + 0.1)/2 = 2.1 > p_hi
        CHECK(best_response(high, Firm::one, 1.0, 1.0) == 2.0);
    }

    SUBCASE("nondecreasing in the rival price and the reference price") {
        double prev = 0.0;
        for (double q = 1.0; q <= 2.0; q += 0.05) {
            const double br = best_response(params, Firm::one, q, 1.5);
            CHECK(br >= prev);
            prev = br;
        }
        prev = 0.0;
        for (double r = 1.0; r <= 2.0; r += 0.05) {
            const double br = best_response(params, Firm::two, 1.5, r);
            CHECK(br >= prev);
            prev = br;
        }
    }
}

TEST_CASE("largest best-response profile is the top fixed point") {
    auto params = example1();
    auto sne = sne_closed_form(params);

    SUBCASE("r* recovers the equilibrium prices") {
        auto p = largest_best_response_profile(params, sne.r_star);
        CHECK(std::abs(p[0] - sne.p1_star) < 1e-8);
        CHECK(std::abs(p[1] - sne.p2_star) < 1e-8);
    }

    SUBCASE("interior fixed point at r = 1 matches the 2x2 solve") {
        auto p = largest_best_response_profile(params, 1.0);
        auto oracle = testsupport::br_profile_oracle(params, 1.0);
        CHECK(p[0] == doctest::Approx(oracle[0]).epsilon(1e-10));
        CHECK(p[1] == doctest::Approx(oracle[1]).epsilon(1e-10));
        // frozen from the elimination oracle
        CHECK(p[0] == doctest::Approx(1.3996627).epsilon(1e-6));
        CHECK(p[1] == doctest::Approx(1.2466273).epsilon(1e-6));
    }

    SUBCASE("clamp-dominated box pins both firms at p_hi") {
        MarketParams high({4, 4}, {1, 1}, {0.1, 0.1}, {0.1, 0.1}, {0.5, 0.5}, 0.4, 1.0, 2.0);
        auto p = largest_best_response_profile(high, high.p_lo());
        CHECK(p[0] == high.p_hi());
        CHECK(p[1] == high.p_hi());
    }

    SUBCASE("iterates fall monotonically from the top") {
        for (double r : {1.0, 1.4, 2.0}) {
            std::vector<std::array<double, 2>> trace;
            largest_best_response_profile(params, r, &trace);
            REQUIRE(trace.size() >= 2);
            CHECK(trace.front()[0] == params.p_hi());
            for (std::size_t k = 1; k < trace.size(); ++k) {
                CHECK(trace[k][0] <= trace[k - 1][0] + 1e-15);
                CHECK(trace[k][1] <= trace[k - 1][1] + 1e-15);
            }
        }
    }

    SUBCASE("random r values match the 2x2 solve or are clamp-consistent") {
        testsupport::RandomMarketGen gen(99);
        for (int k = 0; k < 20; ++k) {
            const double r = gen.uniform(1.0, 2.0);
            auto p = largest_best_response_profile(params, r);
            auto oracle = testsupport::br_profile_oracle(params, r);
            if (oracle[0] > 1.0 && oracle[0] < 2.0 && oracle[1] > 1.0 && oracle[1] < 2.0) {
                CHECK(std::abs(p[0] - oracle[0]) < 1e-8);
                CHECK(std::abs(p[1] - oracle[1]) < 1e-8);
            } else {
                CHECK(std::abs(p[0] - best_response(params, Firm::one, p[1], r)) < 1e-8);
                CHECK(std::abs(p[1] - best_response(params, Firm::two, p[0], r)) < 1e-8);
            }
        }
    }
}

TEST_CASE("best-response dynamics converge monotonically to the SNE") {
    auto params = example1();
    auto sne = sne_closed_form(params);

    SUBCASE("from below: reference price never falls") {
        auto traj = best_response_dynamics(params, 1.0, 200);
        for (std::size_t k = 1; k < traj.size(); ++k) {
            CHECK(traj.r[k] >= traj.r[k - 1]);
            CHECK(traj.p1[k] >= traj.p1[k - 1] - 1e-15);
            CHECK(traj.p2[k] >= traj.p2[k - 1] - 1e-15);
        }
        CHECK(std::abs(traj.p1.back() - sne.p1_star) < 1e-6);
        CHECK(std::abs(traj.p2.back() - sne.p2_star) < 1e-6);
        CHECK(std::abs(traj.r.back() - sne.r_star) < 1e-6);
        // stability condition at the limit
        CHECK(std::abs(nature_gradient(params, traj.p1.back(), traj.p2.back(),
                                       traj.r.back())) < 1e-6);
    }

    SUBCASE("from above: reference price never rises") {
        auto traj = best_response_dynamics(params, 2.0, 200);
        for (std::size_t k = 1; k < traj.size(); ++k) {
            CHECK(traj.r[k] <= traj.r[k - 1]);
            CHECK(traj.p1[k] <= traj.p1[k - 1] + 1e-15);
        }
        CHECK(std::abs(traj.r.back() - sne.r_star) < 1e-6);
    }

    SUBCASE("starting at r* stays at the SNE") {
        auto traj = best_response_dynamics(params, sne.r_star, 50);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            CHECK(std::abs(traj.p1[k] - sne.p1_star) < 1e-8);
            CHECK(std::abs(traj.r[k] - sne.r_star) < 1e-8);
        }
    }
}

TEST_CASE("a box excluding the interior solution yields a boundary equilibrium") {
    // Same market as the reference one, but capped at 1.2: the closed-form
    // candidate lies above the cap, so it is only a candidate.
    MarketParams tight({5, 6}, {2, 3}, {0.4, 0.7}, {0.1, 0.5}, {0.8, 0.2}, 0.4, 1.0, 1.2);
    auto sne = sne_closed_form(tight);
    CHECK_FALSE(sne.interior);
    CHECK(sne.p1_star > tight.p_hi());

    // best-response dynamics still settle on a stable boundary point
    auto traj = best_response_dynamics(tight, 1.1, 300);
    const double p1 = traj.p1.back(), p2 = traj.p2.back(), r = traj.r.back();
    CHECK(std::abs(p1 - best_response(tight, Firm::one, p2, r)) < 1e-8);
    CHECK(std::abs(p2 - best_response(tight, Firm::two, p1, r)) < 1e-8);
    CHECK(std::abs(nature_gradient(tight, p1, p2, r)) < 1e-6);
}

TEST_CASE("singular first-order systems are reported") {
    // Bypassing the m-invariant is impossible through the public constructor,
    // so the guard can only trigger on denominators near zero; verify it stays
    // silent on every generated market instead.
    testsupport::RandomMarketGen gen(123);
    for (int k = 0; k < 20; ++k) CHECK_NOTHROW(sne_closed_form(gen.next()));
}
