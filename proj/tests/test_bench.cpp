#include <catch2/catch_amalgamated.hpp>

#include "support/models.hpp"
#include "trailblazer/bench.hpp"
#include "trailblazer/generators.hpp"
#include "trailblazer/stats.hpp"

using namespace trailblazer;
using Catch::Approx;

TEST_CASE("binomial quantile oracle") {
    // coverage threshold for 200 trials at delta = 0.1 (cross-checked against
    // an independent statistics package)
    CHECK(binomial_upper_quantile(200, 0.1, 0.999) == 34);
    CHECK(binomial_cdf(200, 0.1, 34) >= 0.999);
    CHECK(binomial_cdf(200, 0.1, 33) < 0.999);
    CHECK(binomial_cdf(10, 0.5, 10) == Approx(1.0));
}

TEST_CASE("pac experiment on the trivial cell succeeds everywhere") {
    auto m = testmodels::self_loop_mdp(1.0, 0.5, node_kind::avg);
    experiment_spec spec;
    spec.eps_grid = {1.5};  // above 1/(2(1-gamma)) at an avg root
    spec.delta_grid = {0.1};
    spec.trials = 20;
    const auto records = run_pac_experiment(m, spec);
    REQUIRE(records.size() == 20);
    for (const auto& r : records) {
        CHECK(r.oracle_calls == 0);
        REQUIRE(r.success.has_value());
        CHECK(*r.success);
    }
}

TEST_CASE("experiment seeds follow base + trial index") {
    auto m = testmodels::self_loop_mdp(0.7, 0.5);
    experiment_spec spec;
    spec.eps_grid = {0.5};
    spec.delta_grid = {0.2};
    spec.trials = 3;
    spec.base_seed = 40;
    const auto records = run_pac_experiment(m, spec);
    REQUIRE(records.size() == 3);
    CHECK(records[0].seed == 40);
    CHECK(records[1].seed == 41);
    CHECK(records[2].seed == 42);
}

TEST_CASE("reports are byte-identical across reruns and thread counts") {
    auto m = testmodels::gap06_mdp();
    experiment_spec spec;
    spec.eps_grid = {0.5, 0.4};
    spec.delta_grid = {0.2};
    spec.trials = 4;
    spec.base_seed = 7;
    const auto a = report_to_csv(run_pac_experiment(m, spec));
    const auto b = report_to_csv(run_pac_experiment(m, spec));
    REQUIRE(a == b);
    auto threaded = spec;
    threaded.threads = 3;
    const auto c = report_to_csv(run_pac_experiment(m, threaded));
    REQUIRE(a == c);
}

TEST_CASE("csv shape and round-trip") {
    auto m = testmodels::self_loop_mdp(1.0, 0.5);
    experiment_spec spec;
    spec.eps_grid = {0.4};
    spec.delta_grid = {0.1};
    spec.trials = 1;
    const auto records = run_pac_experiment(m, spec);
    const auto csv = report_to_csv(records);

    SECTION("header plus one row") {
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
        CHECK(csv.rfind("epsilon,delta,seed,estimate,truth,success,", 0) == 0);
    }
    SECTION("reparse reproduces every numeric field exactly") {
        const auto back = parse_report_csv(csv);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].epsilon == records[i].epsilon);
            CHECK(back[i].delta == records[i].delta);
            CHECK(back[i].seed == records[i].seed);
            CHECK(back[i].estimate == records[i].estimate);
            CHECK(back[i].truth == records[i].truth);
            CHECK(back[i].success == records[i].success);
            CHECK(back[i].oracle_calls == records[i].oracle_calls);
            CHECK(back[i].wall_time_ms == records[i].wall_time_ms);
        }
    }
    SECTION("json carries the same values field-by-field") {
        const auto parsed = parse_report_json(report_to_json(records));
        REQUIRE(parsed.size() == records.size());
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            CHECK(parsed[i].epsilon == records[i].epsilon);
            CHECK(parsed[i].estimate == records[i].estimate);
            CHECK(parsed[i].truth == records[i].truth);
            CHECK(parsed[i].success == records[i].success);
            CHECK(parsed[i].oracle_calls == records[i].oracle_calls);
            CHECK(parsed[i].depth == records[i].depth);
        }
    }
}

TEST_CASE("exponent fit") {
    auto planted = [](double c, double power, double noise_mult, std::uint64_t seed) {
        std::vector<trial_record> records;
        rng_stream rng(seed);
        for (double eps : {0.4, 0.3, 0.2, 0.15, 0.1, 0.07}) {
            for (int i = 0; i < 5; ++i) {
                trial_record r;
                r.epsilon = eps;
                r.delta = 0.1;
                r.seed = i;
                const double noise =
                    noise_mult == 0.0 ? 1.0 : 1.0 + noise_mult * (2.0 * rng.u01() - 1.0);
                r.oracle_calls =
                    static_cast<std::uint64_t>(c / std::pow(eps, power) * noise);
                records.push_back(r);
            }
        }
        return records;
    };

    SECTION("exact inverse-square counts") {
        const auto fit = fit_complexity_exponent(planted(1e6, 2.0, 0.0, 1));
        CHECK(fit.slope == Approx(2.0).margin(1e-6));
    }
    SECTION("noisy cubic counts") {
        const auto fit = fit_complexity_exponent(planted(1e6, 3.0, 0.10, 2));
        CHECK(fit.slope == Approx(3.0).margin(0.2));
        CHECK(fit.band_low() <= 3.0);
        CHECK(fit.band_high() >= 3.0);
    }
    SECTION("needs four distinct epsilons") {
        std::vector<trial_record> two;
        for (double eps : {0.4, 0.2}) {
            trial_record r;
            r.epsilon = eps;
            r.oracle_calls = 100;
            two.push_back(r);
        }
        CHECK_THROWS_AS(fit_complexity_exponent(two), std::invalid_argument);
    }
}

TEST_CASE("empty reports are refused") {
    CHECK_THROWS_AS(emit_report({}, "csv", "out.csv"), std::invalid_argument);
    CHECK_THROWS_AS(report_to_string({}, "tsv"), validation_error);
}

TEST_CASE("budget-capped trials are recorded, not dropped") {
    auto m = testmodels::gap06_mdp();
    experiment_spec spec;
    spec.eps_grid = {0.1};
    spec.delta_grid = {0.1};
    spec.trials = 2;
    spec.call_cap = 2000;
    const auto records = run_pac_experiment(m, spec);
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        CHECK(r.budget_hit);
        CHECK_FALSE(r.estimate.has_value());
        CHECK(r.oracle_calls <= 2000);
        REQUIRE(r.success.has_value());
        CHECK_FALSE(*r.success);
    }
    // budget rows keep the csv well-formed
    const auto csv = report_to_csv(records);
    const auto back = parse_report_csv(csv);
    CHECK_FALSE(back[0].estimate.has_value());
}

TEST_CASE("mean demand does not grow with looser accuracy") {
    auto m = testmodels::wide_gap_mdp();
    experiment_spec spec;
    spec.eps_grid = {0.8, 0.6, 0.45, 0.3};
    spec.delta_grid = {0.2};
    spec.trials = 5;
    const auto cells = summarize(run_pac_experiment(m, spec));
    REQUIRE(cells.size() == 4);
    int inversions = 0;
    for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i].mean_oracle_calls > cells[i - 1].mean_oracle_calls) ++inversions;
    // cells are sorted by ascending epsilon: calls should not increase
    CHECK(inversions == 0);
}
