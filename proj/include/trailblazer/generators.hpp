#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "trailblazer/rng.hpp"
#include "trailblazer/tabular.hpp"

namespace trailblazer {

/// Deterministic benchmark-instance generator. Every row gets exactly
/// n_support nonzero transitions with normalized-uniform weights; rewards are
/// Bernoulli with uniform parameters, replaced by a constant zero with
/// probability reward_sparsity. Identical arguments produce identical MDPs.
inline tabular_mdp make_random_mdp(std::uint64_t seed, int n_states, int n_actions, int n_support,
                                   double reward_sparsity, double gamma = 0.5) {
    require(n_states >= 1, "need at least one state");
    require(n_actions >= 1, "need at least one action");
    require(n_support >= 1 && n_support <= n_states,
            "transition support must lie in [1, n_states]");
    require(reward_sparsity >= 0.0 && reward_sparsity <= 1.0, "sparsity must lie in [0, 1]");
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");

    rng_stream rng(seed);
    tabular_mdp mdp;
    mdp.gamma = gamma;
    mdp.root_node = {node_kind::max, 0, 0};
    mdp.states.resize(n_states);

    std::vector<std::int32_t> pool(n_states);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            tabular_action act;
            if (rng.bernoulli(reward_sparsity))
                act.reward = reward_dist::constant(0.0);
            else
                act.reward = reward_dist::bernoulli(rng.u01());

            // partial Fisher-Yates: n_support distinct targets
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < n_support; ++i) {
                const int j = i + static_cast<int>(rng.u01() * (n_states - i));
                std::swap(pool[i], pool[std::min(j, n_states - 1)]);
            }
            std::sort(pool.begin(), pool.begin() + n_support);

            std::vector<double> w(n_support);
            double total = 0.0;
            for (auto& x : w) {
                x = rng.u01() + 1e-9;  // keep every weight strictly positive
                total += x;
            }
            double acc = 0.0;
            for (int i = 0; i < n_support; ++i) {
                double p = (i + 1 == n_support) ? 1.0 - acc : w[i] / total;
                acc += p;
                act.next.push_back({pool[i], p});
            }
            mdp.states[s].push_back(std::move(act));
        }
    }
    mdp.validate();
    return mdp;
}

}  // namespace trailblazer
