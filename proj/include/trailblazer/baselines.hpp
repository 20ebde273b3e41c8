#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <vector>

#include "trailblazer/errors.hpp"
#include "trailblazer/model.hpp"
#include "trailblazer/planner.hpp"

namespace trailblazer {

/// Uniform look-ahead: expand every action, draw a fixed number of
/// transitions per state-action, to a fixed depth.
struct sparse_sampling_config {
    std::int64_t width = 1;  // transition samples per avg expansion (C)
    int horizon = 0;         // depth in max/avg level pairs (H)

    void validate() const {
        require(width >= 1, "sparse sampling width must be >= 1");
        require(horizon >= 0, "sparse sampling horizon must be >= 0");
    }
};

namespace detail {

template <generative_model M>
double sparse_avg(const M& model, const typename M::state_type& s, int action, int pairs_left,
                  std::int64_t width, run_context<M>& ctx, int depth);

template <generative_model M>
double sparse_max(const M& model, const typename M::state_type& s, int pairs_left,
                  std::int64_t width, run_context<M>& ctx, int depth) {
    if (pairs_left == 0) return 0.0;
    ctx.enter(depth);
    const int n = model.action_count(s);
    double best = 0.0;
    for (int a = 0; a < n; ++a) {
        const double q = sparse_avg(model, s, a, pairs_left, width, ctx, depth + 1);
        if (a == 0 || q > best) best = q;
    }
    return best;
}

template <generative_model M>
double sparse_avg(const M& model, const typename M::state_type& s, int action, int pairs_left,
                  std::int64_t width, run_context<M>& ctx, int depth) {
    ctx.enter(depth);
    using S = typename M::state_type;
    double reward_sum = 0.0;
    std::vector<S> uniques;  // first-occurrence order
    std::vector<std::int64_t> counts;
    std::map<S, std::size_t> index;
    for (std::int64_t i = 0; i < width; ++i) {
        auto tr = ctx.draw(s, action);
        reward_sum += tr.reward;
        auto [it, inserted] = index.try_emplace(tr.next, uniques.size());
        if (inserted) {
            uniques.push_back(tr.next);
            counts.push_back(0);
        }
        ++counts[it->second];
    }
    // identical draws recurse once with their multiplicity as the weight
    double mu = 0.0;
    for (std::size_t u = 0; u < uniques.size(); ++u) {
        const double v =
            sparse_max(model, uniques[u], pairs_left - 1, width, ctx, depth + 1);
        mu += v * (static_cast<double>(counts[u]) / static_cast<double>(width));
    }
    return reward_sum / static_cast<double>(width) + ctx.cfg.gamma * mu;
}

}  // namespace detail

/// Estimate the value of a state by uniform sparse look-ahead. The result
/// lies in [0, (1 - gamma^H)/(1 - gamma)] and carries bias at most
/// gamma^H/(1 - gamma) plus sampling error.
template <generative_model M>
double sparse_sampling(const M& model, const typename M::state_type& state,
                       const sparse_sampling_config& ss, detail::run_context<M>& ctx) {
    ss.validate();
    return detail::sparse_max(model, state, ss.horizon, ss.width, ctx, 0);
}

template <generative_model M>
plan_result sparse_plan(const M& model, const planner_config& cfg,
                        const sparse_sampling_config& ss, std::uint64_t seed) {
    cfg.validate();
    ss.validate();
    require(cfg.gamma == model.discount(), "config gamma must match the model discount");
    const auto t0 = std::chrono::steady_clock::now();
    rng_stream rng(seed);
    detail::run_context<M> ctx(model, cfg, rng, std::numeric_limits<int>::max());
    plan_result res;
    res.seed = seed;
    const auto rt = model.root();
    try {
        if (rt.kind == node_kind::max) {
            res.estimate = sparse_sampling(model, rt.state, ss, ctx);
        } else {
            res.estimate = ss.horizon == 0 ? 0.0
                                           : detail::sparse_avg(model, rt.state, rt.action,
                                                                ss.horizon, ss.width, ctx, 0);
            res.root_action = rt.action;
        }
    } catch (budget_exceeded& e) {
        e.max_depth_reached = ctx.max_depth_seen;
        throw;
    }
    res.transition_calls = ctx.counter.transition_calls;
    res.reward_calls = ctx.counter.reward_calls;
    res.oracle_calls = ctx.counter.total();
    res.max_depth_reached = ctx.max_depth_seen;
    res.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Plain Monte-Carlo evaluation: the planner's recursion with the max layer
/// elided. Only valid on models with a single action everywhere; with a
/// shared seed it reproduces the planner's estimate and call count exactly.
template <generative_model M>
double monte_carlo_eval(const M& model, const typename M::state_type& state, std::int64_t m,
                        double eps, detail::run_context<M>& ctx, int depth = 0) {
    ctx.enter(depth);
    require(model.action_count(state) == 1, "monte_carlo_eval needs a single-action model");
    check(m >= 1, "monte_carlo_eval called with m < 1");
    if (eps >= ctx.half_span) return ctx.half_span;

    using S = typename M::state_type;
    double reward_sum = 0.0;
    std::vector<S> uniques;
    std::vector<std::int64_t> counts;
    std::map<S, std::size_t> index;
    for (std::int64_t i = 0; i < m; ++i) {
        auto tr = ctx.draw(state, 0);
        auto [it, inserted] = index.try_emplace(tr.next, uniques.size());
        if (inserted) {
            uniques.push_back(tr.next);
            counts.push_back(0);
        }
        ++counts[it->second];
        reward_sum += tr.reward;
    }

    const double r_bar = reward_sum / static_cast<double>(m);
    const double child_eps = eps / ctx.cfg.gamma;
    double mu = 0.0;
    for (std::size_t u = 0; u < uniques.size(); ++u) {
        const double nu = monte_carlo_eval(model, uniques[u], counts[u], child_eps, ctx, depth + 2);
        mu += nu * (static_cast<double>(counts[u]) / static_cast<double>(m));
    }
    return r_bar + ctx.cfg.gamma * mu;
}

/// Entry point mirroring plan() for single-action models.
template <generative_model M>
plan_result monte_carlo_plan(const M& model, const planner_config& cfg, std::uint64_t seed) {
    cfg.validate();
    require(cfg.gamma == model.discount(), "config gamma must match the model discount");
    const auto t0 = std::chrono::steady_clock::now();
    rng_stream rng(seed);
    detail::run_context<M> ctx(model, cfg, rng, max_depth(cfg.epsilon / 2.0, cfg.gamma));
    plan_result res;
    res.seed = seed;
    res.root_action = 0;
    const auto rt = model.root();
    if (rt.kind == node_kind::avg && cfg.epsilon >= ctx.half_span) {
        res.estimate = ctx.half_span;
    } else {
        const std::int64_t m = sample_budget(cfg);
        const int start_depth = rt.kind == node_kind::max ? 1 : 0;
        try {
            res.estimate = monte_carlo_eval(model, rt.state, m, cfg.epsilon / 2.0, ctx, start_depth);
        } catch (budget_exceeded& e) {
            e.max_depth_reached = ctx.max_depth_seen;
            throw;
        }
    }
    res.transition_calls = ctx.counter.transition_calls;
    res.reward_calls = ctx.counter.reward_calls;
    res.oracle_calls = ctx.counter.total();
    res.max_depth_reached = ctx.max_depth_seen;
    res.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace trailblazer
