#include <catch2/catch_amalgamated.hpp>

#include "trailblazer/planner.hpp"

using namespace trailblazer;
using Catch::Approx;

TEST_CASE("eta shrink factor") {
    // ln(1/0.5) < 2, so the exponent clamps at 2
    CHECK(eta_of(0.5, 0.81) == Approx(0.9).margin(1e-12));
    CHECK(eta_of(0.1, 0.9) == Approx(0.95527).margin(1e-5));
    // clamp regime: eta = sqrt(gamma)
    for (double eps : {0.2, 0.5, 1.0, 7.0})
        CHECK(eta_of(eps, 0.6) == std::sqrt(0.6));
    // always strictly between gamma and 1
    for (double eps : {0.001, 0.05, 0.3, 2.0})
        for (double g : {0.1, 0.5, 0.9, 0.99}) {
            const double e = eta_of(eps, g);
            CHECK(e > g);
            CHECK(e < 1.0);
        }
}

TEST_CASE("depth bound") {
    // eta = 0.9^(1/ln 10) = 0.95527..., ln(eta/gamma) = 0.059603,
    // numerator = 4.60517 -> ceil(77.27) = 78 pairs
    CHECK(max_depth(0.1, 0.9) == 158);

    SECTION("even and at least 4 everywhere") {
        for (double eps : {1e-4, 0.01, 0.3, 1.0, 5.0, 50.0})
            for (double g : {0.001, 0.1, 0.5, 0.9, 0.995}) {
                const int h = max_depth(eps, g);
                CHECK(h % 2 == 0);
                CHECK(h >= 4);
            }
    }
    SECTION("hand-computed pair count") {
        // eta = sqrt(0.5): ceil((ln(1/0.3) + ln 2) / ln sqrt2) = 6 pairs
        CHECK(max_depth(0.3, 0.5) == 14);
    }
    SECTION("small gamma widens the bound by one pair") {
        // eta = sqrt(0.002) < 1/2: one extra pair over the plain formula
        const double eta = eta_of(0.15, 0.002);
        REQUIRE(eta < 0.5);
        CHECK(max_depth(0.15, 0.002) == 6);
    }
}

TEST_CASE("confidence radius") {
    planner_config cfg;
    cfg.gamma = 0.5;
    cfg.delta = 0.1;
    const double eta = std::sqrt(0.5);

    SECTION("spot value") {
        // (4 / ((1 - 0.70711) * 0.5)) * sqrt(ln(1e4) / 16) = 20.723
        CHECK(confidence_radius(16, 1000, cfg, eta) == Approx(20.7228).margin(0.01));
    }
    SECTION("quadrupling k halves the radius") {
        const double u1 = confidence_radius(50, 4000, cfg, eta);
        const double u2 = confidence_radius(200, 4000, cfg, eta);
        CHECK(u2 == Approx(u1 / 2.0).margin(1e-12));
    }
    SECTION("unsampled arm has infinite radius") {
        CHECK(std::isinf(confidence_radius(0, 1000, cfg, eta)));
    }
    SECTION("monotone in t_eff") {
        CHECK(confidence_radius(10, 100, cfg, eta) < confidence_radius(10, 10000, cfg, eta));
    }
    SECTION("variant without the eta factor") {
        planner_config plain = cfg;
        plain.u_eta_factor = false;
        CHECK(confidence_radius(16, 1000, plain, eta) ==
              Approx((4.0 / 0.5) * std::sqrt(std::log(1e4) / 16.0)).margin(1e-9));
    }
}

TEST_CASE("per-run sample budget") {
    planner_config cfg;
    cfg.gamma = 0.5;
    cfg.delta = 0.1;
    cfg.epsilon = 0.5;
    // ceil(ln 10 / 0.0625) = ceil(36.84) = 37
    CHECK(sample_budget(cfg) == 37);

    cfg.epsilon = 100.0;  // never below 1
    CHECK(sample_budget(cfg) == 1);
}

TEST_CASE("run counter clamps t at 2") {
    run_counter c;
    CHECK(c.t_eff() == 2);
    c.transition_calls = 1;
    CHECK(c.t_eff() == 2);
    c.reward_calls = 2;
    CHECK(c.t_eff() == 3);
}

TEST_CASE("config validation") {
    planner_config cfg;
    cfg.gamma = 0.5;
    cfg.delta = 0.1;
    cfg.epsilon = 0.1;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.delta = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
