#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

#include "trailblazer/errors.hpp"
#include "trailblazer/model.hpp"
#include "trailblazer/rng.hpp"

namespace trailblazer {

/// State of the continuous-transition toy: a coordinate in [0, 1] plus the
/// rng draw index that produced it. The tag makes every sampled state a
/// distinct tree child, so sibling merging never happens.
struct toy_state {
    double coord = 0.5;
    std::uint64_t tag = 0;
    friend auto operator<=>(const toy_state&, const toy_state&) = default;
};

/// How action gaps vary over the state space.
///   bounded_gap(d):  gap(u) = d + (1 - d) u, so every state has gap >= d.
///   power_law(b, c): gap(u) = min(1, (u/c)^(1/b)), so a uniformly drawn
///                    next state satisfies P(gap <= x) = min(1, c x^b).
struct gap_profile {
    enum class kind_t { bounded, power_law };

    static gap_profile bounded_gap(double min_gap) {
        if (!(min_gap > 0.0 && min_gap <= 1.0))
            throw validation_error("bounded_gap needs a minimum gap in (0, 1]");
        return {kind_t::bounded, min_gap, 0.0};
    }
    static gap_profile power_law(double exponent, double scale) {
        if (!(exponent > 0.0) || !(scale > 0.0))
            throw validation_error("power_law needs positive exponent and scale");
        return {kind_t::power_law, exponent, scale};
    }

    double gap_at(double u) const {
        if (kind == kind_t::bounded) return a + (1.0 - a) * u;
        return std::min(1.0, std::pow(u / b, 1.0 / a));
    }

    /// E[gap(U)] for U uniform on [0, 1], in closed form.
    double mean_gap() const {
        if (kind == kind_t::bounded) return a + 0.5 * (1.0 - a);
        if (b >= 1.0) return (a / (a + 1.0)) * std::pow(1.0 / b, 1.0 / a);
        return 1.0 - b / (a + 1.0);
    }

    kind_t kind;
    double a;  // min gap, or exponent b
    double b;  // unused, or scale c
};

/// Continuous-transition environment: two actions, next state uniform on
/// [0, 1] for either action, rewards Bernoulli(1/2 +- gap/2). Because the
/// continuation is action-independent, the action gap at a state with
/// coordinate u is exactly profile.gap_at(u), and all values have closed
/// forms. The default discount keeps the effective horizon short, so runs on
/// this infinitely-branching model stay within desk-scale call budgets.
class continuous_toy {
  public:
    using state_type = toy_state;

    continuous_toy(std::uint64_t seed, gap_profile profile, double gamma = 0.002)
        : profile_(profile), gamma_(gamma) {
        require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
        rng_stream r(seed);
        root_coord_ = 0.25 + 0.5 * r.u01();
    }

    double discount() const { return gamma_; }
    int action_count(const toy_state&) const { return 2; }
    root_of<toy_state> root() const { return {node_kind::max, toy_state{root_coord_, 0}, 0}; }

    sampled_transition<toy_state> sample(const toy_state& s, int a, rng_stream& rng) const {
        const double coord = rng.u01();
        const toy_state next{coord, rng.draws()};
        const double r = rng.bernoulli(mean_reward(s.coord, a)) ? 1.0 : 0.0;
        return {r, next};
    }

    // --- closed-form values ---

    double mean_reward(double u, int action) const {
        const double g = profile_.gap_at(u);
        return action == 0 ? 0.5 + 0.5 * g : 0.5 - 0.5 * g;
    }

    /// gamma * E[V(U)]: the continuation term shared by both actions.
    double continuation() const {
        const double mean_best = 0.5 + 0.5 * profile_.mean_gap();
        return gamma_ * mean_best / (1.0 - gamma_);
    }

    double action_value(double u, int action) const {
        return mean_reward(u, action) + continuation();
    }

    double state_value(double u) const { return mean_reward(u, 0) + continuation(); }

    /// Exact gap between the two actions at coordinate u.
    double gap_at(double u) const { return profile_.gap_at(u); }

    double root_value() const { return state_value(root_coord_); }
    double root_coord() const { return root_coord_; }
    const gap_profile& profile() const { return profile_; }

  private:
    gap_profile profile_;
    double gamma_;
    double root_coord_;
};

}  // namespace trailblazer
