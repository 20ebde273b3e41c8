#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "trailblazer/errors.hpp"
#include "trailblazer/model.hpp"
#include "trailblazer/rng.hpp"

namespace trailblazer {

/// Planner parameters. gamma and delta are global to a run; epsilon is the
/// target accuracy handed to plan(). u_constant and u_eta_factor select the
/// confidence-radius variant.
struct planner_config {
    double gamma = 0.9;
    double delta = 0.1;
    double epsilon = 0.1;
    double u_constant = 4.0;   // numerator of the confidence radius
    bool u_eta_factor = true;  // include the 1/(1 - eta) factor
    std::uint64_t call_cap = 0;  // 0 = unlimited
    /// Replace maximal runs of child calls that provably answer from the
    /// avg-node guard (no sampling, midpoint output) by their closed form.
    /// Bit-for-bit equivalent to the plain loop; exists so deep nodes do not
    /// spin through millions of no-op iterations.
    bool fast_spin = true;

    void validate() const {
        require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
        require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        require(epsilon > 0.0, "epsilon must be positive");
        require(u_constant > 0.0, "u_constant must be positive");
    }
};

/// Global oracle-call accounting for one run. A transition draw and its
/// paired reward draw count as one call each; t_eff clamps the total to >= 2
/// so that ln(t/delta) stays usable from the first radius evaluation.
struct run_counter {
    std::uint64_t transition_calls = 0;
    std::uint64_t reward_calls = 0;
    std::uint64_t total() const { return transition_calls + reward_calls; }
    std::uint64_t t_eff() const { return total() < 2 ? 2 : total(); }
};

struct plan_result {
    double estimate = 0.0;
    std::uint64_t oracle_calls = 0;
    std::uint64_t transition_calls = 0;
    std::uint64_t reward_calls = 0;
    int max_depth_reached = 0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
    /// Action chosen at a max root (surviving candidate, else argmax of the
    /// child estimates); the designated action at an avg root.
    int root_action = -1;
};

/// Per-node bias shrink factor: gamma^(1 / max(2, ln(1/eps))). Lies in
/// [sqrt(gamma), 1).
inline double eta_of(double eps, double gamma) {
    if (eps > 0.1354) return std::sqrt(gamma);  // ln(1/eps) < 2 whenever eps > e^-2
    const double x = std::max(2.0, std::log(1.0 / eps));
    if (x == 2.0) return std::sqrt(gamma);
    return std::pow(gamma, 1.0 / x);
}

/// Number of calls a node must spread its variance budget over:
/// ceil(ln(1/delta) / ((1-gamma)^2 eps^2)).
inline std::int64_t sample_budget(const planner_config& cfg) {
    const double m = std::log(1.0 / cfg.delta) /
                     ((1.0 - cfg.gamma) * (1.0 - cfg.gamma) * cfg.epsilon * cfg.epsilon);
    auto r = static_cast<std::int64_t>(std::ceil(m));
    return r < 1 ? 1 : r;
}

/// Hard bound on the depth of any node called during a run whose root call
/// uses bias eps. Derived from the bias cascade: an avg node multiplies the
/// bias floor by 1/gamma, a max node by eta, and an avg node called with bias
/// at or above 1/(2(1-gamma)) answers without recursing.
///
/// The base pair count ceil((ln(1/eps) + ln(1/(1-gamma))) / ln(eta/gamma))
/// tracks the even-depth floor only; odd depths carry one extra eta factor,
/// so for eta < 1/2 (small gamma) further level pairs are reachable. The
/// extra pairs below keep the bound sound in that regime and leave the
/// eta >= 1/2 value unchanged.
inline int max_depth(double eps, double gamma) {
    require(eps > 0.0, "eps must be positive");
    require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
    const double eta = eta_of(eps, gamma);
    const double den = std::log(eta / gamma);
    const double num = std::log(1.0 / eps) + std::log(1.0 / (1.0 - gamma));
    auto pairs = static_cast<std::int64_t>(std::ceil(num / den));
    if (pairs < 1) pairs = 1;
    if (eta < 0.5) pairs += static_cast<std::int64_t>(std::ceil(std::log(0.5 / eta) / den));
    return static_cast<int>(2 * pairs + 2);
}

/// Confidence radius of a child estimate built from k calls at global time
/// t_eff. Monotone decreasing in k, increasing in t_eff; an unsampled child
/// has infinite radius and therefore always remains a candidate.
inline double confidence_radius(std::int64_t k, std::uint64_t t_eff, const planner_config& cfg,
                                double eta) {
    if (k <= 0) return std::numeric_limits<double>::infinity();
    double coef = cfg.u_constant / (1.0 - cfg.gamma);
    if (cfg.u_eta_factor) coef /= (1.0 - eta);
    return coef *
           std::sqrt(std::log(static_cast<double>(t_eff) / cfg.delta) / static_cast<double>(k));
}

namespace detail {

inline double radius_coefficient(const planner_config& cfg, double eta) {
    double coef = cfg.u_constant / (1.0 - cfg.gamma);
    if (cfg.u_eta_factor) coef /= (1.0 - eta);
    return coef;
}

/// Everything one planning run owns: the model handle, rng, counters and the
/// depth instrumentation. Never shared across runs.
template <generative_model M>
struct run_context {
    const M& model;
    const planner_config& cfg;
    rng_stream& rng;
    run_counter counter;
    double span;
    double half_span;
    int depth_guard;
    int max_depth_seen = 0;

    run_context(const M& model, const planner_config& cfg, rng_stream& rng, int guard)
        : model(model),
          cfg(cfg),
          rng(rng),
          span(value_span(cfg.gamma)),
          half_span(midpoint_value(cfg.gamma)),
          depth_guard(guard) {}

    void enter(int depth) {
        if (depth > max_depth_seen) {
            max_depth_seen = depth;
            check(depth <= depth_guard, "node called below the proven maximum depth");
        }
    }

    double log_t_over_delta() const {
        const std::uint64_t t = counter.t_eff();
        if (t != lt_for_) {
            lt_for_ = t;
            lt_ = std::log(static_cast<double>(t) / cfg.delta);
        }
        return lt_;
    }

  private:
    mutable std::uint64_t lt_for_ = 0;
    mutable double lt_ = 0.0;

  public:

    sampled_transition<typename M::state_type> draw(const typename M::state_type& s, int action) {
        if (cfg.call_cap != 0 && counter.total() + 2 > cfg.call_cap)
            throw budget_exceeded(cfg.call_cap, counter.transition_calls, counter.reward_calls,
                                  max_depth_seen);
        auto tr = sample_transition(model, s, action, rng);
        ++counter.transition_calls;
        ++counter.reward_calls;
        return tr;
    }
};

template <generative_model M>
class avg_node;

/// A max node owns one arm per action. Arms carry the call-count parameter
/// k, the last estimate mu and the bias that produced it; they persist across
/// calls, so a repeated call resumes elimination instead of restarting it.
template <generative_model M>
class max_node {
  public:
    using S = typename M::state_type;

    max_node(S state, int depth, run_context<M>& ctx) : state_(std::move(state)), depth_(depth) {
        const int n = ctx.model.action_count(state_);
        check(n >= 1, "max node needs at least one action");
        arms_.resize(static_cast<std::size_t>(n));
        live_.reserve(arms_.size());
    }

    double call(std::int64_t m, double eps, run_context<M>& ctx);

    /// O(1) certificate that call(m, eps) would run zero loop iterations and
    /// return quiescent_value(): the stopping radius already holds and the
    /// arm estimates are too close for any exclusion at current radii. Both
    /// tests are sufficient conditions precomputed at the last full exit;
    /// a false negative just means the parent makes the real call.
    bool quiescent(double eps, double lt) const {
        return quies_valid_ && eps > 0.1354 && eps * eps >= lt * quies_q_ && lt >= quies_p_;
    }
    double quiescent_value() const { return quies_value_; }

    int last_selected() const { return selected_; }
    std::int64_t arm_calls(int i) const { return arms_[static_cast<std::size_t>(i)].k; }
    double arm_estimate(int i) const { return arms_[static_cast<std::size_t>(i)].mu; }

  private:
    struct arm {
        std::int64_t k = 0;
        double mu = 0.0;
        double eps = 0.0;
        std::unique_ptr<avg_node<M>> node;
    };

    avg_node<M>& child(std::size_t i, run_context<M>& ctx);

    static double radius(double coef, double lt, std::int64_t k) {
        if (k <= 0) return std::numeric_limits<double>::infinity();
        return coef * std::sqrt(lt / static_cast<double>(k));
    }

    /// Candidate set: arms whose upper bound reaches the best lower bound.
    /// Rebuilt from the persistent statistics at call entry, then only ever
    /// shrinks until the call returns.
    void shrink(double coef, double lt) {
        double bar = -std::numeric_limits<double>::infinity();
        for (int i : live_) {
            const arm& a = arms_[static_cast<std::size_t>(i)];
            const double low = a.mu - 2.0 * radius(coef, lt, a.k);
            if (low > bar) bar = low;
        }
        std::size_t out = 0;
        for (int i : live_) {
            const arm& a = arms_[static_cast<std::size_t>(i)];
            if (a.mu + 2.0 * radius(coef, lt, a.k) >= bar) live_[out++] = i;
        }
        live_.resize(out);
    }

    /// Closed form for a maximal run of loop iterations whose child calls
    /// answer from the avg-node guard: no sampling happens, t is frozen, all
    /// touched estimates become the midpoint, and the candidate set cannot
    /// change. The plain loop level-fills the live arms (argmin k, lowest
    /// index first), so its state after the run is k = min(k_stop, k_free)
    /// for every arm that started below, where k_stop satisfies the radius
    /// stopping rule and k_free is the last k whose bias still clears the
    /// guard. Boundaries are located with the loop's own float expressions.
    void spin_free_phase(double eps, double eta, double u_stop, double coef,
                         run_context<M>& ctx) {
        if (live_.size() <= 1) return;
        for (int i : live_) {
            const arm& a = arms_[static_cast<std::size_t>(i)];
            if (a.k > 0 && a.mu != ctx.half_span) return;
        }
        const double lt = ctx.log_t_over_delta();
        const auto bias_at = [&](std::int64_t k) { return eta * std::max(radius(coef, lt, k), eps); };

        // smallest k with radius <= u_stop
        std::int64_t lo = 1, hi = 1;
        while (radius(coef, lt, hi) > u_stop && hi < (std::int64_t{1} << 60)) hi *= 2;
        lo = hi / 2 < 1 ? 1 : hi / 2;
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (radius(coef, lt, mid) <= u_stop)
                hi = mid;
            else
                lo = mid + 1;
        }
        const std::int64_t k_stop = lo;

        std::int64_t k_cap = k_stop;
        if (bias_at(k_stop) < ctx.half_span) {
            // largest k whose call is still free; 0 when even the first call samples
            if (bias_at(1) < ctx.half_span) return;
            std::int64_t flo = 1, fhi = 2;
            while (fhi < k_stop && bias_at(fhi) >= ctx.half_span) fhi *= 2;
            fhi = std::min(fhi, k_stop);
            // invariant: bias_at(flo) free, bias_at(fhi) not (or fhi == k_stop)
            while (flo + 1 < fhi) {
                const std::int64_t mid = flo + (fhi - flo) / 2;
                if (bias_at(mid) >= ctx.half_span)
                    flo = mid;
                else
                    fhi = mid;
            }
            k_cap = bias_at(fhi) >= ctx.half_span ? fhi : flo;
        }
        if (k_cap <= 0) return;

        bool any = false;
        for (int i : live_) {
            arm& a = arms_[static_cast<std::size_t>(i)];
            if (a.k >= k_cap) continue;
            a.k = k_cap;
            a.mu = ctx.half_span;
            a.eps = bias_at(k_cap);
            invalidate();
            any = true;
        }
        // the replaced iterations called the avg children, which record their
        // depth before answering from the guard
        if (any) ctx.enter(depth_ + 1);
    }

    /// Largest ln(t_eff/delta) (exclusive) for which a repeat call with the
    /// same eps is guaranteed to reproduce the cached exit: the stopping rule
    /// stays satisfied and no eliminated arm re-enters the candidate set.
    /// Radii grow with ln(t), so both conditions reduce to a cap on
    /// W = sqrt(ln(t/delta)). The bound is conservative; a miss just re-runs
    /// the loop.
    double memo_threshold(double eps, double eta, double coef, run_context<M>& ctx) const {
        const double u_stop = (1.0 - eta) * eps;
        const double lt = ctx.log_t_over_delta();

        std::int64_t k_min = std::numeric_limits<std::int64_t>::max();
        int bar_arm = -1;
        double bar = -std::numeric_limits<double>::infinity();
        for (int i : live_) {
            const arm& a = arms_[static_cast<std::size_t>(i)];
            if (a.k <= 0) return 0.0;
            k_min = std::min(k_min, a.k);
            const double low = a.mu - 2.0 * radius(coef, lt, a.k);
            if (low > bar) {
                bar = low;
                bar_arm = i;
            }
        }
        const arm& best = arms_[static_cast<std::size_t>(bar_arm)];
        double w = (u_stop / coef) * std::sqrt(static_cast<double>(k_min));
        std::size_t live_idx = 0;
        for (std::size_t i = 0; i < arms_.size(); ++i) {
            if (live_idx < live_.size() && static_cast<std::size_t>(live_[live_idx]) == i) {
                ++live_idx;
                continue;
            }
            const arm& a = arms_[i];
            if (a.k <= 0 || best.mu <= a.mu) return 0.0;
            const double denom =
                2.0 * coef *
                (1.0 / std::sqrt(static_cast<double>(a.k)) +
                 1.0 / std::sqrt(static_cast<double>(best.k)));
            w = std::min(w, (best.mu - a.mu) / denom);
        }
        if (!(w > 0.0)) return 0.0;
        // shaved so float slop in this algebra can never outrun the loop's
        // own comparisons
        return w * w * (1.0 - 1e-9);
    }

    void invalidate() {
        memo_.valid = false;
        quies_valid_ = false;
    }

    /// Publish the quiescence certificate after an exit with every arm still
    /// live. Constants use the sqrt(gamma) bias regime, which quiescent()
    /// restricts itself to.
    void publish_quiescence(double out, const planner_config& cfg) {
        if (arms_.size() < 2) return;
        const double eta_c = std::sqrt(cfg.gamma);
        const double coef_c = radius_coefficient(cfg, eta_c);
        std::int64_t k_min = arms_[0].k, k_max = arms_[0].k;
        double mu_min = arms_[0].mu, mu_max = arms_[0].mu;
        for (const arm& a : arms_) {
            k_min = std::min(k_min, a.k);
            k_max = std::max(k_max, a.k);
            mu_min = std::min(mu_min, a.mu);
            mu_max = std::max(mu_max, a.mu);
        }
        if (k_min < 1) return;
        // loop closed: coef_c * sqrt(lt / k_min) <= (1 - eta_c) * eps
        const double r = coef_c / (1.0 - eta_c);
        quies_q_ = (r * r / static_cast<double>(k_min)) * (1.0 + 1e-9);
        // no exclusions: mu_max - mu_min <= 4 * coef_c * sqrt(lt / k_max)
        const double d = mu_max - mu_min;
        quies_p_ = (d * d * static_cast<double>(k_max) / (16.0 * coef_c * coef_c)) * (1.0 + 1e-9);
        quies_value_ = out;
        quies_valid_ = true;
    }

    S state_;
    int depth_;
    std::vector<arm> arms_;
    std::vector<int> live_;
    int selected_ = -1;
    double eta_cache_eps_ = -1.0;
    double eta_cache_ = 0.0;
    struct {
        bool valid = false;
        double eps = 0.0;
        double value = 0.0;
        double lt_below = 0.0;  // cap on ln(t_eff/delta)
        int selected = -1;
    } memo_;
    bool quies_valid_ = false;
    double quies_q_ = 0.0;
    double quies_p_ = 0.0;
    double quies_value_ = 0.0;
};

/// An avg node keeps every transition it ever sampled (in sampling order,
/// with repetitions) and the running reward sum. A call with parameter m
/// works on the first m samples only; later samples stay stored for parents
/// that may ask again with a larger m.
template <generative_model M>
class avg_node {
  public:
    using S = typename M::state_type;

    avg_node(S state, int action, int depth)
        : state_(std::move(state)), action_(action), depth_(depth) {}

    double call(std::int64_t m, double eps, run_context<M>& ctx);

    std::size_t sample_count() const { return samples_.size(); }
    std::size_t unique_count() const { return unique_states_.size(); }
    std::int64_t active_multiplicity(std::size_t u) const { return active_count_[u]; }

  private:
    max_node<M>& child(std::size_t u, run_context<M>& ctx) {
        if (!unique_nodes_[u])
            unique_nodes_[u] = std::make_unique<max_node<M>>(unique_states_[u], depth_ + 1, ctx);
        return *unique_nodes_[u];
    }

    std::uint32_t upsert(const S& s) {
        auto [it, inserted] =
            index_of_.try_emplace(s, static_cast<std::uint32_t>(unique_states_.size()));
        if (inserted) {
            unique_states_.push_back(s);
            unique_nodes_.push_back(nullptr);
            active_count_.push_back(0);
        }
        return it->second;
    }

    void set_active_prefix(std::int64_t m) {
        while (active_len_ < m) ++active_count_[samples_[static_cast<std::size_t>(active_len_++)]];
        while (active_len_ > m) --active_count_[samples_[static_cast<std::size_t>(--active_len_)]];
    }

    S state_;
    int action_;
    int depth_;
    double reward_sum_ = 0.0;
    std::vector<std::uint32_t> samples_;  // per draw: index into unique_states_
    std::vector<S> unique_states_;        // first-occurrence order
    std::vector<std::unique_ptr<max_node<M>>> unique_nodes_;
    std::vector<std::int64_t> active_count_;
    std::int64_t active_len_ = 0;
    std::map<S, std::uint32_t> index_of_;
};

template <generative_model M>
avg_node<M>& max_node<M>::child(std::size_t i, run_context<M>& ctx) {
    auto& a = arms_[i];
    if (!a.node) a.node = std::make_unique<avg_node<M>>(state_, static_cast<int>(i), depth_ + 1);
    (void)ctx;
    return *a.node;
}

template <generative_model M>
double max_node<M>::call(std::int64_t m, double eps, run_context<M>& ctx) {
    ctx.enter(depth_);
    const planner_config& cfg = ctx.cfg;
    const double lt0 = ctx.log_t_over_delta();

    if (memo_.valid && eps == memo_.eps && lt0 < memo_.lt_below) {
        selected_ = memo_.selected;
        return memo_.value;
    }

    if (eps != eta_cache_eps_) {
        eta_cache_eps_ = eps;
        eta_cache_ = eta_of(eps, cfg.gamma);
    }
    const double eta = eta_cache_;
    const double u_stop = (1.0 - eta) * eps;
    const double coef = radius_coefficient(cfg, eta);

    // Stateless shortcut: when every arm is sampled, no arm is excluded at
    // the current radii, and the stopping rule already holds, the loop body
    // cannot run and the exit value is the best current estimate. This is
    // what a repeat call spends almost all its time concluding.
    if (arms_.size() > 1 && arms_.size() <= 16) {
        std::int64_t k_min = std::numeric_limits<std::int64_t>::max();
        for (const arm& a : arms_) k_min = std::min(k_min, a.k);
        if (k_min >= 1 && radius(coef, lt0, k_min) <= u_stop) {
            double twice_u[16];
            double bar = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < arms_.size(); ++i) {
                twice_u[i] = 2.0 * radius(coef, lt0, arms_[i].k);
                const double low = arms_[i].mu - twice_u[i];
                if (low > bar) bar = low;
            }
            bool all_in = true;
            for (std::size_t i = 0; i < arms_.size(); ++i)
                if (arms_[i].mu + twice_u[i] < bar) {
                    all_in = false;
                    break;
                }
            if (all_in) {
                int pick = 0;
                for (std::size_t i = 1; i < arms_.size(); ++i)
                    if (arms_[i].mu > arms_[static_cast<std::size_t>(pick)].mu)
                        pick = static_cast<int>(i);
                selected_ = pick;
                const double best = arms_[static_cast<std::size_t>(pick)].mu;
                if (!quies_valid_) publish_quiescence(best, cfg);
                return best;
            }
        }
    }

    live_.clear();
    for (std::size_t i = 0; i < arms_.size(); ++i) live_.push_back(static_cast<int>(i));
    shrink(coef, ctx.log_t_over_delta());
    if (cfg.fast_spin) spin_free_phase(eps, eta, u_stop, coef, ctx);

    while (live_.size() > 1) {
        const double lt = ctx.log_t_over_delta();
        double max_u = 0.0;
        for (int i : live_)
            max_u = std::max(max_u, radius(coef, lt, arms_[static_cast<std::size_t>(i)].k));
        if (max_u <= u_stop) break;

        int pick = live_[0];
        for (int i : live_)
            if (arms_[static_cast<std::size_t>(i)].k < arms_[static_cast<std::size_t>(pick)].k)
                pick = i;

        arm& a = arms_[static_cast<std::size_t>(pick)];
        a.k += 1;
        invalidate();
        const double u = radius(coef, lt, a.k);
        const double bias = eta * std::max(u, eps);
        a.mu = child(static_cast<std::size_t>(pick), ctx).call(a.k, bias, ctx);
        a.eps = bias;
        shrink(coef, ctx.log_t_over_delta());
        if (cfg.fast_spin) spin_free_phase(eps, eta, u_stop, coef, ctx);
    }

    double out;
    if (live_.size() == 1) {
        const int l = live_[0];
        out = child(static_cast<std::size_t>(l), ctx).call(m, eps, ctx);
        arm& a = arms_[static_cast<std::size_t>(l)];
        a.mu = out;
        a.eps = eps;
        a.k = std::max(a.k, m);
        invalidate();
        selected_ = l;
    } else {
        int pick = live_[0];
        for (int i : live_)
            if (arms_[static_cast<std::size_t>(i)].mu > arms_[static_cast<std::size_t>(pick)].mu)
                pick = i;
        out = arms_[static_cast<std::size_t>(pick)].mu;
        selected_ = pick;
        memo_ = {true, eps, out, memo_threshold(eps, eta, coef, ctx), pick};
        memo_.valid = memo_.lt_below > 0.0;
        if (live_.size() == arms_.size()) publish_quiescence(out, cfg);
    }
    check(out >= -1e-9 && out <= ctx.span + 1e-9, "max node output left [0, 1/(1-gamma)]");
    return out;
}

template <generative_model M>
double avg_node<M>::call(std::int64_t m, double eps, run_context<M>& ctx) {
    ctx.enter(depth_);
    check(m >= 1, "avg node called with m < 1");
    if (eps >= ctx.half_span) return ctx.half_span;

    while (static_cast<std::int64_t>(samples_.size()) < m) {
        auto tr = ctx.draw(state_, action_);
        samples_.push_back(upsert(tr.next));
        reward_sum_ += tr.reward;
    }
    set_active_prefix(m);

    const double r_bar = reward_sum_ / static_cast<double>(samples_.size());
    const double child_eps = eps / ctx.cfg.gamma;
    double mu = 0.0;
    std::int64_t covered = 0;
    for (std::size_t u = 0; u < unique_states_.size(); ++u) {
        const std::int64_t k = active_count_[u];
        if (k == 0) continue;
        covered += k;
        max_node<M>& c = child(u, ctx);
        const double nu = c.quiescent(child_eps, ctx.log_t_over_delta())
                              ? c.quiescent_value()
                              : c.call(k, child_eps, ctx);
        mu += nu * (static_cast<double>(k) / static_cast<double>(m));
    }
    check(covered == m, "active multiplicities must sum to m");

    const double out = r_bar + ctx.cfg.gamma * mu;
    check(out >= -1e-9 && out <= ctx.span + 1e-9, "avg node output left [0, 1/(1-gamma)]");
    return out;
}

}  // namespace detail

/// Run the planner on the model's root with the given accuracy target.
/// Deterministic in (model, config, seed).
template <generative_model M>
plan_result plan(const M& model, const planner_config& cfg, rng_stream& rng,
                 std::uint64_t seed_label = 0) {
    cfg.validate();
    require(cfg.gamma == model.discount(), "config gamma must match the model discount");
    const auto t0 = std::chrono::steady_clock::now();

    plan_result res;
    res.seed = seed_label;
    const auto rt = model.root();
    detail::run_context<M> ctx(model, cfg, rng, max_depth(cfg.epsilon / 2.0, cfg.gamma));

    if (rt.kind == node_kind::avg && cfg.epsilon >= ctx.half_span) {
        // The root avg node would answer any bias request this large from its
        // guard alone, and half the value span is within the accuracy target.
        res.estimate = ctx.half_span;
        res.root_action = rt.action;
    } else {
        const std::int64_t m = sample_budget(cfg);
        try {
            if (rt.kind == node_kind::max) {
                detail::max_node<M> root(rt.state, 0, ctx);
                res.estimate = root.call(m, cfg.epsilon / 2.0, ctx);
                res.root_action = root.last_selected();
            } else {
                detail::avg_node<M> root(rt.state, rt.action, 0);
                res.estimate = root.call(m, cfg.epsilon / 2.0, ctx);
                res.root_action = rt.action;
            }
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

template <generative_model M>
plan_result plan(const M& model, const planner_config& cfg, std::uint64_t seed) {
    rng_stream rng(seed);
    return plan(model, cfg, rng, seed);
}

}  // namespace trailblazer
