#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <json.hpp>

#include "trailblazer/errors.hpp"
#include "trailblazer/rng.hpp"
#include "trailblazer/stats.hpp"
#include "trailblazer/tabular.hpp"

namespace trailblazer {

/// One node of the unrolled planning tree. States reached along different
/// paths stay distinct nodes; only the value is shared via the underlying
/// state.
struct tree_node {
    node_kind kind = node_kind::max;
    std::int32_t state = 0;
    int action = 0;  // avg nodes only
    int depth = 0;
    int parent = -1;
    std::vector<int> children;
    double value = 0.0;
    /// max nodes: best minus second-best child value; +infinity with a single
    /// child; unused on avg nodes.
    double gap = 0.0;
    int best_child = -1;
};

struct tree_index {
    std::vector<tree_node> nodes;
    std::vector<std::vector<int>> by_depth;
    int depth = 0;
    double gamma = 0.0;
    int max_actions = 0;
    int max_support = 0;
    double value_tol = 0.0;

    const tree_node& operator[](int i) const { return nodes[static_cast<std::size_t>(i)]; }

    bool is_ancestor(int ancestor, int node) const {
        int cur = nodes[static_cast<std::size_t>(node)].parent;
        while (cur != -1) {
            if (cur == ancestor) return true;
            cur = nodes[static_cast<std::size_t>(cur)].parent;
        }
        return false;
    }
};

/// Unroll the MDP into its path tree down to the given depth. Node values
/// are backed up from horizon-truncated state values whose tail is below
/// value_tol, so internal max values equal the exact maximum of their
/// children and argmax relations hold exactly.
inline tree_index enumerate_tree(const tabular_mdp& mdp, int depth,
                                 std::size_t node_cap = 2'000'000, double value_tol = 1e-9) {
    require(depth >= 0, "depth must be nonnegative");
    mdp.validate();

    tree_index tree;
    tree.depth = depth;
    tree.gamma = mdp.gamma;
    tree.max_actions = mdp.max_actions();
    tree.max_support = mdp.max_support();
    tree.value_tol = value_tol;
    tree.by_depth.resize(static_cast<std::size_t>(depth) + 1);

    const int horizon = horizon_for_tail(mdp.gamma, value_tol);
    const std::vector<double> v = state_values(mdp, horizon);

    // breadth-first expansion
    tree_node root;
    root.kind = mdp.root_node.kind;
    root.state = mdp.root_node.state;
    root.action = mdp.root_node.action;
    tree.nodes.push_back(root);
    tree.by_depth[0].push_back(0);

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const tree_node cur = tree.nodes[i];  // copy: vector may reallocate
        if (cur.depth >= depth) continue;
        if (cur.kind == node_kind::max) {
            const int n = mdp.action_count(cur.state);
            for (int a = 0; a < n; ++a) {
                tree_node child;
                child.kind = node_kind::avg;
                child.state = cur.state;
                child.action = a;
                child.depth = cur.depth + 1;
                child.parent = static_cast<int>(i);
                if (tree.nodes.size() >= node_cap)
                    throw validation_error("tree enumeration cap exceeded");
                tree.nodes[i].children.push_back(static_cast<int>(tree.nodes.size()));
                tree.by_depth[static_cast<std::size_t>(child.depth)].push_back(
                    static_cast<int>(tree.nodes.size()));
                tree.nodes.push_back(child);
            }
        } else {
            const auto& row = mdp.states[cur.state][cur.action].next;
            for (const auto& e : row) {
                tree_node child;
                child.kind = node_kind::max;
                child.state = e.state;
                child.depth = cur.depth + 1;
                child.parent = static_cast<int>(i);
                if (tree.nodes.size() >= node_cap)
                    throw validation_error("tree enumeration cap exceeded");
                tree.nodes[i].children.push_back(static_cast<int>(tree.nodes.size()));
                tree.by_depth[static_cast<std::size_t>(child.depth)].push_back(
                    static_cast<int>(tree.nodes.size()));
                tree.nodes.push_back(child);
            }
        }
    }

    // bottom-up values; leaves read the truncated state values
    const double inf = std::numeric_limits<double>::infinity();
    for (auto it = tree.nodes.rbegin(); it != tree.nodes.rend(); ++it) {
        tree_node& n = *it;
        if (n.kind == node_kind::max) {
            if (n.children.empty()) {
                n.value = v[static_cast<std::size_t>(n.state)];
                n.gap = inf;
                continue;
            }
            double best = -inf, second = -inf;
            for (int c : n.children) {
                const double val = tree.nodes[static_cast<std::size_t>(c)].value;
                if (val > best) {
                    second = best;
                    best = val;
                    n.best_child = c;
                } else if (val > second) {
                    second = val;
                }
            }
            n.value = best;
            n.gap = n.children.size() == 1 ? inf : best - second;
        } else {
            const auto& act = mdp.states[n.state][static_cast<std::size_t>(n.action)];
            if (n.children.empty()) {
                n.value = action_value(mdp, n.state, n.action, v);
                continue;
            }
            double acc = act.reward.mean();
            for (std::size_t c = 0; c < n.children.size(); ++c)
                acc += mdp.gamma * act.next[c].prob *
                       tree.nodes[static_cast<std::size_t>(n.children[c])].value;
            n.value = acc;
        }
    }
    return tree;
}

/// Value lost at max ancestor `ancestor` by committing to the child leading
/// toward `descendant`: best child value minus the on-path child value.
/// Exactly zero when the path goes through an argmax child.
inline double delta_to(const tree_index& tree, int ancestor, int descendant) {
    require(ancestor >= 0 && descendant >= 0 &&
                ancestor < static_cast<int>(tree.nodes.size()) &&
                descendant < static_cast<int>(tree.nodes.size()),
            "node id out of range");
    require(tree[ancestor].kind == node_kind::max, "delta_to needs a max ancestor");
    if (tree[ancestor].children.size() <= 1) {
        require(ancestor == descendant || tree.is_ancestor(ancestor, descendant),
                "delta_to needs an ancestor on the descendant's path");
        return 0.0;
    }
    int cur = descendant;
    int below = -1;
    while (cur != -1 && cur != ancestor) {
        below = cur;
        cur = tree[below].parent;
    }
    require(cur == ancestor && below != -1, "delta_to needs an ancestor on the descendant's path");
    return tree[ancestor].value - tree[below].value;
}

inline std::function<double(int)> default_theta(double gamma) {
    return [gamma](int j) { return std::pow(gamma, j) / (1.0 - gamma); };
}

/// Nodes of one depth whose path losses stay under the threshold at every
/// max ancestor. Nodes within `band` of a threshold are reported separately
/// instead of being silently classified.
struct near_optimal_set {
    int depth = 0;
    std::vector<int> members;
    std::vector<int> ambiguous;
};

inline near_optimal_set compute_near_optimal(const tree_index& tree, int h,
                                             const std::function<double(int)>& theta,
                                             double band = 1e-9) {
    require(h >= 0 && h <= tree.depth, "depth outside the enumerated tree");
    near_optimal_set out;
    out.depth = h;
    for (int id : tree.by_depth[static_cast<std::size_t>(h)]) {
        bool in = true, borderline = false;
        int below = id;
        for (int anc = tree[id].parent; anc != -1; below = anc, anc = tree[below].parent) {
            if (tree[anc].kind != node_kind::max) continue;
            const double d = tree[anc].value - tree[below].value;
            const double t = theta(h - tree[anc].depth);
            if (d > t + band) {
                in = false;
                break;
            }
            if (d > t - band) borderline = true;
        }
        if (!in) continue;
        if (borderline)
            out.ambiguous.push_back(id);
        else
            out.members.push_back(id);
    }
    return out;
}

/// Growth-exponent fit for near-optimal set sizes: least squares of
/// ln|N_2h| - h ln N against h, exponentiated and clamped to [1, K].
struct kappa_fit {
    double kappa = 1.0;
    double raw = 1.0;
    double log_constant = 0.0;
    double residual_rms = 0.0;
    bool clamped = false;
    int points = 0;
};

inline kappa_fit estimate_kappa(const std::vector<std::int64_t>& sizes, int n_support,
                                int n_actions) {
    require(n_support >= 1 && n_actions >= 1, "bad branching bounds");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] <= 0) continue;
        const double h = static_cast<double>(i + 1);
        xs.push_back(h);
        ys.push_back(std::log(static_cast<double>(sizes[i])) - h * std::log(n_support));
    }
    require(xs.size() >= 3, "kappa fit needs at least three depths with nonzero sizes");
    const line_fit f = fit_line(xs, ys);
    kappa_fit out;
    out.points = f.points;
    out.raw = std::exp(f.slope);
    out.log_constant = f.intercept;
    out.residual_rms = f.residual_rms;
    out.kappa = out.raw;
    if (out.kappa < 1.0) {
        out.kappa = 1.0;
        out.clamped = true;
    }
    if (out.kappa > n_actions) {
        out.kappa = n_actions;
        out.clamped = true;
    }
    return out;
}

/// Monte-Carlo mean of the difficulty integrand at one depth: draw one
/// transition per avg node from the root down, pick one of the resulting
/// depth-h max nodes uniformly, and weight near-optimal picks by the
/// inverse-gap factors of their max ancestors.
inline double estimate_d_mean(const tabular_mdp& mdp, const tree_index& tree, double xi, int h,
                              int n_samples, rng_stream& rng,
                              const std::function<double(int)>& theta) {
    require(h >= 0 && h % 2 == 0, "h must be even");
    require(h <= tree.depth, "tree too shallow for the requested depth");
    require(n_samples >= 1, "need at least one sample");
    require(xi > 0.0, "xi must be positive");
    require(tree[0].kind == node_kind::max, "d estimation needs a max root");

    const auto nearset = compute_near_optimal(tree, h, theta);
    std::vector<char> member(tree.nodes.size(), 0);
    for (int id : nearset.members) member[static_cast<std::size_t>(id)] = 1;
    for (int id : nearset.ambiguous) member[static_cast<std::size_t>(id)] = 1;

    std::vector<int> leaves;
    double total = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        leaves.clear();
        // materialize one random subtree: all actions, one transition draw each
        std::vector<int> frontier{0};
        std::vector<int> next;
        while (!frontier.empty()) {
            next.clear();
            for (int id : frontier) {
                const tree_node& n = tree[id];
                if (n.depth == h) {
                    leaves.push_back(id);
                    continue;
                }
                if (n.kind == node_kind::max) {
                    for (int c : n.children) next.push_back(c);
                } else {
                    const auto& row = mdp.states[n.state][static_cast<std::size_t>(n.action)].next;
                    std::size_t pick = row.size() - 1;
                    if (row.size() > 1) {
                        const double u = rng.u01();
                        double acc = 0.0;
                        for (std::size_t i = 0; i < row.size(); ++i) {
                            acc += row[i].prob;
                            if (u < acc) {
                                pick = i;
                                break;
                            }
                        }
                    }
                    next.push_back(n.children[pick]);
                }
            }
            frontier.swap(next);
        }
        check(!leaves.empty(), "sampled subtree has no leaves");
        std::size_t pick = static_cast<std::size_t>(rng.u01() * static_cast<double>(leaves.size()));
        if (pick >= leaves.size()) pick = leaves.size() - 1;
        const int leaf = leaves[pick];

        if (!member[static_cast<std::size_t>(leaf)]) continue;
        double factor = static_cast<double>(leaves.size());  // inverse pick probability
        for (int anc = tree[leaf].parent; anc != -1; anc = tree[anc].parent) {
            if (tree[anc].kind != node_kind::max) continue;
            const int j = h - tree[anc].depth;
            if (tree[anc].gap < theta(j)) factor *= xi / std::pow(tree.gamma, j);
        }
        total += factor;
    }
    return total / n_samples;
}

struct d_fit {
    double d = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> depths;
    std::vector<double> means;
    double residual_rms = 0.0;
    bool fit_ok = false;
};

/// Regress ln(mean) on h ln(1/gamma) over an even-depth grid. Labeled an
/// estimate: the definition quantifies over all xi and depths.
inline d_fit estimate_d(const tabular_mdp& mdp, const tree_index& tree, double xi,
                        const std::vector<int>& h_grid, int n_samples, rng_stream& rng,
                        const std::function<double(int)>& theta) {
    d_fit out;
    std::vector<double> xs, ys;
    for (int h : h_grid) {
        const double mean = estimate_d_mean(mdp, tree, xi, h, n_samples, rng, theta);
        out.depths.push_back(h);
        out.means.push_back(mean);
        if (mean > 0.0) {
            xs.push_back(h * std::log(1.0 / tree.gamma));
            ys.push_back(std::log(mean));
        }
    }
    if (xs.size() >= 2) {
        const line_fit f = fit_line(xs, ys);
        out.d = f.slope;
        out.residual_rms = f.residual_rms;
        out.fit_ok = true;
    }
    return out;
}

struct difficulty_options {
    int tree_depth = 6;
    int h_cap = 3;                    // kappa fit uses depths 2..2*h_cap
    std::vector<double> xi_grid{0.1};
    std::vector<int> d_depths{2, 4};
    int d_samples = 2000;
    std::uint64_t seed = 0;
    std::size_t node_cap = 2'000'000;
    double value_tol = 1e-9;
    int histogram_bins = 20;
};

struct difficulty_report {
    double gamma = 0.0;
    int n_states = 0;
    int n_actions = 0;
    int n_support = 0;
    int tree_depth = 0;
    std::vector<std::int64_t> sizes;      // |N_2h| for h = 1..h_cap
    std::vector<std::int64_t> ambiguous;  // borderline counts per depth
    kappa_fit kappa;
    bool kappa_ok = false;
    std::vector<double> gap_histogram;  // finite max-node gaps over [0, span]
    std::int64_t infinite_gaps = 0;
    std::vector<std::pair<double, d_fit>> d_estimates;  // per xi
};

inline difficulty_report analyze_difficulty(const tabular_mdp& mdp,
                                            const difficulty_options& opt = {}) {
    require(opt.h_cap >= 1, "h_cap must be >= 1");
    require(2 * opt.h_cap <= opt.tree_depth, "tree too shallow for the kappa depth cap");
    difficulty_report rep;
    rep.gamma = mdp.gamma;
    rep.n_states = mdp.n_states();
    rep.n_actions = mdp.max_actions();
    rep.n_support = mdp.max_support();
    rep.tree_depth = opt.tree_depth;

    const tree_index tree = enumerate_tree(mdp, opt.tree_depth, opt.node_cap, opt.value_tol);
    const auto theta = default_theta(mdp.gamma);

    for (int h = 1; h <= opt.h_cap; ++h) {
        const auto set = compute_near_optimal(tree, 2 * h, theta);
        rep.sizes.push_back(static_cast<std::int64_t>(set.members.size()));
        rep.ambiguous.push_back(static_cast<std::int64_t>(set.ambiguous.size()));
    }
    try {
        rep.kappa = estimate_kappa(rep.sizes, rep.n_support, rep.n_actions);
        rep.kappa_ok = true;
    } catch (const std::invalid_argument&) {
        rep.kappa_ok = false;
    }

    rep.gap_histogram.assign(static_cast<std::size_t>(opt.histogram_bins), 0.0);
    const double span = value_span(mdp.gamma);
    for (const auto& n : tree.nodes) {
        if (n.kind != node_kind::max) continue;
        if (std::isinf(n.gap)) {
            ++rep.infinite_gaps;
            continue;
        }
        auto bin = static_cast<std::size_t>(n.gap / span * opt.histogram_bins);
        if (bin >= rep.gap_histogram.size()) bin = rep.gap_histogram.size() - 1;
        rep.gap_histogram[bin] += 1.0;
    }

    if (tree[0].kind == node_kind::max) {
        rng_stream rng(opt.seed);
        for (double xi : opt.xi_grid)
            rep.d_estimates.emplace_back(
                xi, estimate_d(mdp, tree, xi, opt.d_depths, opt.d_samples, rng, theta));
    }
    return rep;
}

inline nlohmann::ordered_json to_json(const difficulty_report& rep) {
    nlohmann::ordered_json j;
    j["gamma"] = rep.gamma;
    j["n_states"] = rep.n_states;
    j["n_actions"] = rep.n_actions;
    j["n_support"] = rep.n_support;
    j["tree_depth"] = rep.tree_depth;
    nlohmann::ordered_json sizes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rep.sizes.size(); ++i)
        sizes.push_back({{"depth", 2 * (i + 1)},
                         {"size", rep.sizes[i]},
                         {"ambiguous", rep.ambiguous[i]}});
    j["near_optimal_sizes"] = sizes;
    if (rep.kappa_ok)
        j["kappa"] = {{"value", rep.kappa.kappa},     {"raw", rep.kappa.raw},
                      {"clamped", rep.kappa.clamped}, {"residual_rms", rep.kappa.residual_rms},
                      {"points", rep.kappa.points}};
    else
        j["kappa"] = nullptr;
    j["gap_histogram"] = rep.gap_histogram;
    j["infinite_gaps"] = rep.infinite_gaps;
    nlohmann::ordered_json ds = nlohmann::ordered_json::array();
    for (const auto& [xi, fit] : rep.d_estimates) {
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < fit.depths.size(); ++i)
            points.push_back({{"h", fit.depths[i]}, {"mean", fit.means[i]}});
        ds.push_back({{"xi", xi},
                      {"points", points},
                      {"d", fit.fit_ok ? nlohmann::ordered_json(fit.d)
                                       : nlohmann::ordered_json(nullptr)},
                      {"residual_rms", fit.residual_rms}});
    }
    j["d_estimates"] = ds;
    return j;
}

}  // namespace trailblazer
