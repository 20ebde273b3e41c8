#pragma once

#include <concepts>
#include <cstdint>
#include <utility>

#include "trailblazer/errors.hpp"
#include "trailblazer/rng.hpp"

namespace trailblazer {

enum class node_kind { max, avg };

/// Width of the value range [0, 1/(1-gamma)] induced by unit-interval rewards.
inline double value_span(double gamma) { return 1.0 / (1.0 - gamma); }

/// Output of an avg node whose requested bias exceeds half the value range.
inline double midpoint_value(double gamma) { return 0.5 / (1.0 - gamma); }

/// One oracle answer: a reward draw paired with a next-state draw.
template <class S>
struct sampled_transition {
    double reward;
    S next;
};

/// Where planning starts: a state (max root) or a state-action (avg root).
template <class S>
struct root_of {
    node_kind kind = node_kind::max;
    S state{};
    int action = 0;  // meaningful for avg roots only
};

/// A generative model is the planner's only access to the MDP: it samples
/// (reward, next-state) pairs for a state-action and exposes the discount.
/// Implementations hold no per-run mutable state; concurrent runs are safe
/// as long as each owns its rng_stream.
template <class M>
concept generative_model = requires(const M m, const typename M::state_type& s, int a,
                                    rng_stream& rng) {
    { m.discount() } -> std::convertible_to<double>;
    { m.action_count(s) } -> std::convertible_to<int>;
    { m.sample(s, a, rng) } -> std::same_as<sampled_transition<typename M::state_type>>;
    { m.root() } -> std::same_as<root_of<typename M::state_type>>;
};

/// Draw one (reward, next) pair. Counting oracle calls is the caller's job.
template <generative_model M>
sampled_transition<typename M::state_type> sample_transition(const M& model,
                                                             const typename M::state_type& state,
                                                             int action, rng_stream& rng) {
    require(action >= 0 && action < model.action_count(state), "invalid action index");
    auto tr = model.sample(state, action, rng);
#ifndef NDEBUG
    if (!(tr.reward >= 0.0 && tr.reward <= 1.0)) check(false, "reward outside [0,1]");
#endif
    return tr;
}

}  // namespace trailblazer
