#include <catch2/catch_amalgamated.hpp>

#include "support/models.hpp"
#include "trailblazer/baselines.hpp"
#include "trailblazer/generators.hpp"

using namespace trailblazer;
using Catch::Approx;

namespace {

planner_config make_cfg(double gamma, double delta, double eps) {
    planner_config cfg;
    cfg.gamma = gamma;
    cfg.delta = delta;
    cfg.epsilon = eps;
    return cfg;
}

}  // namespace

TEST_CASE("sparse sampling base case") {
    auto m = testmodels::gap06_mdp();
    const auto res = sparse_plan(m, make_cfg(0.5, 0.1, 0.5), {64, 0}, 1);
    CHECK(res.estimate == 0.0);
    CHECK(res.oracle_calls == 0);
}

TEST_CASE("sparse sampling sums the deterministic chain exactly") {
    auto m = testmodels::chain_mdp(30, 0.5, {1.0});  // constant 1 rewards via p=1 bernoulli
    const auto res = sparse_plan(m, make_cfg(0.5, 0.1, 0.5), {1, 20}, 3);
    // sum over t < 20 of gamma^t
    const double expect = (1.0 - std::pow(0.5, 20)) / 0.5;
    CHECK(res.estimate == Approx(expect).margin(1e-12));
}

TEST_CASE("sparse sampling finds the better arm on the gap instance") {
    // constant-reward variant: action values still 0.8 vs 0.2
    auto m = testmodels::two_action_mdp(0.4, 0.1, 0.5, /*bernoulli=*/false);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto res = sparse_plan(m, make_cfg(0.5, 0.1, 0.5), {64, 10}, seed);
        if (std::abs(res.estimate - 0.8) <= 0.1) ++ok;
    }
    CHECK(ok >= 90);
}

TEST_CASE("sparse sampling output range") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto m = make_random_mdp(seed, 5, 2, 2, 0.2, 0.5);
        const int horizon = 1 + static_cast<int>(seed % 5);
        const auto res = sparse_plan(m, make_cfg(0.5, 0.1, 0.5), {8, horizon}, seed);
        CHECK(res.estimate >= 0.0);
        CHECK(res.estimate <= (1.0 - std::pow(0.5, horizon)) / 0.5 + 1e-12);
    }
}

TEST_CASE("monte-carlo guard mirrors the avg node") {
    auto m = testmodels::self_loop_mdp(1.0, 0.5, node_kind::avg);
    const auto res = monte_carlo_plan(m, make_cfg(0.5, 0.1, 2.5), 5);
    CHECK(res.estimate == 1.0);
    CHECK(res.oracle_calls == 0);
}

TEST_CASE("monte-carlo evaluation concentrates on the true value") {
    auto m = testmodels::self_loop_mdp(1.0, 0.5);  // V = 2
    rng_stream probe(0);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        rng_stream rng(seed);
        planner_config cfg = make_cfg(0.5, 0.1, 0.2);
        detail::run_context<tabular_mdp> ctx(m, cfg, rng, 1000);
        const double est = monte_carlo_eval(m, 0, 400, 0.1, ctx, 1);
        if (std::abs(est - 2.0) <= 0.15) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("monte-carlo rejects models with control") {
    auto m = testmodels::gap06_mdp();
    CHECK_THROWS_AS(monte_carlo_plan(m, make_cfg(0.5, 0.1, 0.5), 1), std::invalid_argument);
}

TEST_CASE("shared seeds reproduce the planner exactly") {
    auto m = make_random_mdp(33, 5, 1, 3, 0.1, 0.5);
    const auto cfg = make_cfg(0.5, 0.1, 0.4);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = plan(m, cfg, seed);
        const auto b = monte_carlo_plan(m, cfg, seed);
        REQUIRE(a.estimate == b.estimate);
        REQUIRE(a.oracle_calls == b.oracle_calls);
        REQUIRE(a.reward_calls == b.reward_calls);
    }
}
