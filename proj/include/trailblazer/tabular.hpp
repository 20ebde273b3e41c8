#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "trailblazer/errors.hpp"
#include "trailblazer/model.hpp"
#include "trailblazer/rng.hpp"

namespace trailblazer {

/// Reward distribution attached to a state-action pair. Values stay in [0, 1].
class reward_dist {
  public:
    enum class family : std::uint8_t { constant, bernoulli };

    reward_dist() : fam_(family::constant), param_(0.0) {}

    static reward_dist constant(double c) { return reward_dist(family::constant, c); }
    static reward_dist bernoulli(double p) { return reward_dist(family::bernoulli, p); }

    family kind() const { return fam_; }
    double param() const { return param_; }
    double mean() const { return param_; }

    /// A constant reward consumes no randomness.
    double sample(rng_stream& rng) const {
        if (fam_ == family::constant) return param_;
        return rng.bernoulli(param_) ? 1.0 : 0.0;
    }

    bool operator==(const reward_dist&) const = default;

  private:
    reward_dist(family f, double p) : fam_(f), param_(p) {}
    family fam_;
    double param_;
};

struct transition_entry {
    std::int32_t state;
    double prob;
    bool operator==(const transition_entry&) const = default;
};

struct tabular_action {
    reward_dist reward;
    std::vector<transition_entry> next;  // sparse row; probabilities sum to 1
    bool operator==(const tabular_action&) const = default;
};

constexpr double row_sum_tolerance = 1e-12;

/// Explicit finite MDP. States index rows; each row lists its actions with a
/// reward distribution and a sparse next-state distribution. Doubles as a
/// generative model for the planners.
struct tabular_mdp {
    using state_type = std::int32_t;

    double gamma = 0.9;
    root_of<state_type> root_node{};
    std::vector<std::vector<tabular_action>> states;

    bool operator==(const tabular_mdp& other) const {
        return gamma == other.gamma && root_node.kind == other.root_node.kind &&
               root_node.state == other.root_node.state &&
               root_node.action == other.root_node.action && states == other.states;
    }

    int n_states() const { return static_cast<int>(states.size()); }

    /// Largest action count over states (the planner's K).
    int max_actions() const {
        std::size_t k = 0;
        for (const auto& s : states) k = std::max(k, s.size());
        return static_cast<int>(k);
    }

    /// Largest transition support over rows (the planner's N).
    int max_support() const {
        std::size_t n = 0;
        for (const auto& s : states)
            for (const auto& a : s) n = std::max(n, a.next.size());
        return static_cast<int>(n);
    }

    /// Full structural validation with row-level diagnostics.
    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw validation_error("gamma must lie strictly inside (0, 1), got " +
                                   std::to_string(gamma));
        if (states.empty()) throw validation_error("mdp has no states");
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (states[s].empty())
                throw validation_error("state " + std::to_string(s) + " has no actions");
            for (std::size_t a = 0; a < states[s].size(); ++a) {
                const auto& act = states[s][a];
                const std::string where =
                    "state " + std::to_string(s) + " action " + std::to_string(a);
                if (!(act.reward.param() >= 0.0 && act.reward.param() <= 1.0))
                    throw validation_error(where + ": reward parameter " +
                                           std::to_string(act.reward.param()) +
                                           " outside [0, 1]");
                if (act.next.empty()) throw validation_error(where + ": empty transition row");
                double sum = 0.0;
                for (const auto& e : act.next) {
                    if (e.state < 0 || e.state >= n_states())
                        throw validation_error(where + ": next state " +
                                               std::to_string(e.state) + " out of range");
                    if (!(e.prob >= 0.0 && e.prob <= 1.0))
                        throw validation_error(where + ": transition probability " +
                                               std::to_string(e.prob) + " outside [0, 1]");
                    sum += e.prob;
                }
                if (std::abs(sum - 1.0) > row_sum_tolerance)
                    throw validation_error(where + ": transition probabilities sum to " +
                                           std::to_string(sum));
            }
        }
        if (root_node.state < 0 || root_node.state >= n_states())
            throw validation_error("root state out of range");
        if (root_node.kind == node_kind::avg &&
            (root_node.action < 0 ||
             root_node.action >= static_cast<int>(states[root_node.state].size())))
            throw validation_error("root action out of range");
    }

    // --- generative-model surface ---

    double discount() const { return gamma; }
    root_of<state_type> root() const { return root_node; }

    int action_count(state_type s) const { return static_cast<int>(states[s].size()); }

    sampled_transition<state_type> sample(state_type s, int a, rng_stream& rng) const {
        const tabular_action& act = states[s][a];
        state_type next;
        if (act.next.size() == 1) {
            next = act.next.front().state;  // single support: no draw needed
        } else {
            const double u = rng.u01();
            double acc = 0.0;
            next = act.next.back().state;
            for (const auto& e : act.next) {
                acc += e.prob;
                if (u < acc) {
                    next = e.state;
                    break;
                }
            }
        }
        return {act.reward.sample(rng), next};
    }
};

/// Horizon-bracketed value: true value lies in [lower, upper].
struct value_bounds {
    double lower = 0.0;
    double upper = 0.0;
    int horizon = 0;
    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Optimal h-step truncated values for every state (h applications of the
/// max/backup recursion, zero terminal values).
inline std::vector<double> state_values(const tabular_mdp& mdp, int horizon) {
    require(horizon >= 0, "horizon must be nonnegative");
    std::vector<double> v(mdp.states.size(), 0.0);
    std::vector<double> next(v.size(), 0.0);
    for (int h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < mdp.states.size(); ++s) {
            double best = 0.0;
            bool first = true;
            for (const auto& act : mdp.states[s]) {
                double q = act.reward.mean();
                for (const auto& e : act.next) q += mdp.gamma * e.prob * v[e.state];
                if (first || q > best) best = q;
                first = false;
            }
            next[s] = best;
        }
        v.swap(next);
    }
    return v;
}

/// One backup of (s, a) against the supplied state values.
inline double action_value(const tabular_mdp& mdp, std::int32_t s, int a,
                           const std::vector<double>& values) {
    const auto& act = mdp.states[s][a];
    double q = act.reward.mean();
    for (const auto& e : act.next) q += mdp.gamma * e.prob * values[e.state];
    return q;
}

inline double value_tail(double gamma, int horizon) {
    return std::pow(gamma, horizon) / (1.0 - gamma);
}

/// Horizon-truncated optimal value of a state, bracketing the true value.
inline value_bounds exact_value(const tabular_mdp& mdp, std::int32_t state, int horizon) {
    require(state >= 0 && state < mdp.n_states(), "state out of range");
    const double lower = state_values(mdp, horizon)[state];
    return {lower, lower + value_tail(mdp.gamma, horizon), horizon};
}

/// Value of the configured root (max rule at a state root, avg rule at a
/// state-action root).
inline value_bounds exact_root_value(const tabular_mdp& mdp, int horizon) {
    if (mdp.root_node.kind == node_kind::max) return exact_value(mdp, mdp.root_node.state, horizon);
    require(horizon >= 0, "horizon must be nonnegative");
    double lower = 0.0;
    if (horizon >= 1) {
        const auto v = state_values(mdp, horizon - 1);
        lower = action_value(mdp, mdp.root_node.state, mdp.root_node.action, v);
    }
    return {lower, lower + value_tail(mdp.gamma, horizon), horizon};
}

/// Smallest horizon whose tail bound drops below tol.
inline int horizon_for_tail(double gamma, double tol) {
    require(gamma > 0.0 && gamma < 1.0 && tol > 0.0, "bad horizon query");
    int h = 0;
    double tail = 1.0 / (1.0 - gamma);
    while (tail > tol && h < 1'000'000) {
        tail *= gamma;
        ++h;
    }
    return h;
}

}  // namespace trailblazer
