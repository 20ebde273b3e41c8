#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "trailblazer/baselines.hpp"
#include "trailblazer/continuous.hpp"
#include "trailblazer/errors.hpp"
#include "trailblazer/planner.hpp"
#include "trailblazer/stats.hpp"
#include "trailblazer/tabular.hpp"

namespace trailblazer {

enum class planner_kind { trailblazer, sparse, monte_carlo };

inline const char* planner_name(planner_kind p) {
    switch (p) {
        case planner_kind::trailblazer: return "trailblazer";
        case planner_kind::sparse: return "sparse";
        case planner_kind::monte_carlo: return "monte_carlo";
    }
    return "?";
}

inline planner_kind planner_from_name(const std::string& name) {
    if (name == "trailblazer") return planner_kind::trailblazer;
    if (name == "sparse") return planner_kind::sparse;
    if (name == "monte_carlo") return planner_kind::monte_carlo;
    throw validation_error("unknown planner \"" + name + "\"");
}

/// Grid experiment description. Trial i of any cell runs with seed
/// base_seed + i, so reports are a pure function of this struct.
struct experiment_spec {
    std::vector<double> eps_grid{0.5};
    std::vector<double> delta_grid{0.1};
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::uint64_t call_cap = 0;
    planner_kind planner = planner_kind::trailblazer;
    sparse_sampling_config sparse{};
    double u_constant = 4.0;
    bool u_eta_factor = true;
    bool record_timing = false;  // off by default: reports stay byte-reproducible
    int threads = 1;

    void validate() const {
        require(!eps_grid.empty() && !delta_grid.empty(), "empty parameter grid");
        for (double e : eps_grid) require(e > 0.0, "epsilon grid values must be positive");
        for (double d : delta_grid)
            require(d > 0.0 && d < 1.0, "delta grid values must lie in (0, 1)");
        require(trials >= 1, "need at least one trial per cell");
        require(threads >= 1, "threads must be >= 1");
    }
};

struct trial_record {
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> estimate;
    std::optional<double> truth;
    std::optional<bool> success;
    std::uint64_t oracle_calls = 0;
    std::uint64_t transition_calls = 0;
    std::uint64_t reward_calls = 0;
    int depth = 0;
    double wall_time_ms = 0.0;
    bool budget_hit = false;
};

struct cell_summary {
    double epsilon = 0.0;
    double delta = 0.0;
    int trials = 0;
    int judged = 0;    // trials with a defined success flag
    int failures = 0;  // judged trials with success == false
    double mean_oracle_calls = 0.0;
    double mean_depth = 0.0;
    int budget_hits = 0;
};

inline nlohmann::ordered_json to_json(const plan_result& r) {
    nlohmann::ordered_json j;
    j["estimate"] = r.estimate;
    j["oracle_calls"] = r.oracle_calls;
    j["transition_calls"] = r.transition_calls;
    j["reward_calls"] = r.reward_calls;
    j["max_depth_reached"] = r.max_depth_reached;
    j["wall_time_ms"] = r.wall_time_ms;
    j["seed"] = r.seed;
    return j;
}

/// Exact root value available for this model, as (value, bracket width).
inline std::optional<std::pair<double, double>> truth_bracket(const tabular_mdp& mdp, double tol) {
    const int h = horizon_for_tail(mdp.gamma, tol);
    const value_bounds vb = exact_root_value(mdp, h);
    return std::make_pair(vb.midpoint(), vb.width());
}

inline std::optional<std::pair<double, double>> truth_bracket(const continuous_toy& toy, double) {
    return std::make_pair(toy.root_value(), 0.0);
}

template <generative_model M>
std::optional<std::pair<double, double>> truth_bracket(const M&, double) {
    return std::nullopt;
}

/// Run the full (epsilon, delta) grid. Deterministic given the spec; trials
/// are isolated runs, so they may execute on several threads without
/// changing the records. Output is ordered by (epsilon, delta, seed).
template <generative_model M>
std::vector<trial_record> run_pac_experiment(const M& model, const experiment_spec& spec) {
    spec.validate();

    double min_eps = spec.eps_grid.front();
    for (double e : spec.eps_grid) min_eps = std::min(min_eps, e);
    const auto truth = truth_bracket(model, min_eps / 20.0);

    struct task {
        double eps;
        double delta;
        std::uint64_t seed;
    };
    std::vector<task> tasks;
    for (double eps : spec.eps_grid)
        for (double delta : spec.delta_grid)
            for (int i = 0; i < spec.trials; ++i)
                tasks.push_back({eps, delta, spec.base_seed + static_cast<std::uint64_t>(i)});

    std::vector<trial_record> records(tasks.size());
    auto run_one = [&](std::size_t idx) {
        const task& t = tasks[idx];
        planner_config cfg;
        cfg.gamma = model.discount();
        cfg.delta = t.delta;
        cfg.epsilon = t.eps;
        cfg.u_constant = spec.u_constant;
        cfg.u_eta_factor = spec.u_eta_factor;
        cfg.call_cap = spec.call_cap;

        trial_record r;
        r.epsilon = t.eps;
        r.delta = t.delta;
        r.seed = t.seed;
        try {
            plan_result res;
            switch (spec.planner) {
                case planner_kind::trailblazer: res = plan(model, cfg, t.seed); break;
                case planner_kind::sparse: res = sparse_plan(model, cfg, spec.sparse, t.seed); break;
                case planner_kind::monte_carlo: res = monte_carlo_plan(model, cfg, t.seed); break;
            }
            r.estimate = res.estimate;
            r.oracle_calls = res.oracle_calls;
            r.transition_calls = res.transition_calls;
            r.reward_calls = res.reward_calls;
            r.depth = res.max_depth_reached;
            r.wall_time_ms = spec.record_timing ? res.wall_time_ms : 0.0;
        } catch (const budget_exceeded& e) {
            r.budget_hit = true;
            r.transition_calls = e.transition_calls;
            r.reward_calls = e.reward_calls;
            r.oracle_calls = e.transition_calls + e.reward_calls;
            r.depth = e.max_depth_reached;
        }
        if (truth && truth->second < t.eps / 10.0) {
            r.truth = truth->first;
            r.success = r.estimate && std::abs(*r.estimate - truth->first) <= t.eps;
        }
        records[idx] = r;
    };

    if (spec.threads == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                run_one(i);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < spec.threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(records.begin(), records.end(), [](const trial_record& a, const trial_record& b) {
        if (a.epsilon != b.epsilon) return a.epsilon < b.epsilon;
        if (a.delta != b.delta) return a.delta < b.delta;
        return a.seed < b.seed;
    });
    return records;
}

inline std::vector<cell_summary> summarize(const std::vector<trial_record>& records) {
    std::vector<cell_summary> cells;
    for (const auto& r : records) {
        if (cells.empty() || cells.back().epsilon != r.epsilon || cells.back().delta != r.delta) {
            cell_summary c;
            c.epsilon = r.epsilon;
            c.delta = r.delta;
            cells.push_back(c);
        }
        auto& c = cells.back();
        ++c.trials;
        if (r.success.has_value()) {
            ++c.judged;
            if (!*r.success) ++c.failures;
        }
        if (r.budget_hit) ++c.budget_hits;
        c.mean_oracle_calls += static_cast<double>(r.oracle_calls);
        c.mean_depth += r.depth;
    }
    for (auto& c : cells) {
        c.mean_oracle_calls /= c.trials;
        c.mean_depth /= c.trials;
    }
    return cells;
}

/// OLS of ln(mean oracle calls) on ln(1/epsilon).
struct exponent_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_rms = 0.0;
    int points = 0;
    double band_low() const { return slope - 2.0 * slope_stderr; }
    double band_high() const { return slope + 2.0 * slope_stderr; }
};

inline exponent_fit fit_complexity_exponent(const std::vector<trial_record>& records) {
    struct acc {
        double eps;
        double sum = 0.0;
        int n = 0;
    };
    std::vector<acc> groups;
    for (const auto& r : records) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const acc& g) { return g.eps == r.epsilon; });
        if (it == groups.end()) {
            groups.push_back({r.epsilon});
            it = groups.end() - 1;
        }
        it->sum += static_cast<double>(r.oracle_calls);
        it->n += 1;
    }
    require(groups.size() >= 4, "exponent fit needs at least four distinct epsilon values");
    std::vector<double> xs, ys;
    for (const auto& g : groups) {
        const double mean = g.sum / g.n;
        require(mean > 0.0, "exponent fit needs nonzero call counts");
        xs.push_back(std::log(1.0 / g.eps));
        ys.push_back(std::log(mean));
    }
    const line_fit f = fit_line(xs, ys);
    return {f.slope, f.intercept, f.slope_stderr, f.residual_rms, f.points};
}

// --- report emission -------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline const char* report_columns() {
    return "epsilon,delta,seed,estimate,truth,success,oracle_calls,transition_calls,"
           "reward_calls,depth,wall_time_ms";
}

inline std::string report_to_csv(const std::vector<trial_record>& records) {
    std::string out = report_columns();
    out += '\n';
    for (const auto& r : records) {
        out += format_double(r.epsilon);
        out += ',';
        out += format_double(r.delta);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        if (r.estimate) out += format_double(*r.estimate);
        out += ',';
        if (r.truth) out += format_double(*r.truth);
        out += ',';
        if (r.success) out += *r.success ? "true" : "false";
        out += ',';
        out += std::to_string(r.oracle_calls);
        out += ',';
        out += std::to_string(r.transition_calls);
        out += ',';
        out += std::to_string(r.reward_calls);
        out += ',';
        out += std::to_string(r.depth);
        out += ',';
        out += format_double(r.wall_time_ms);
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json record_to_json(const trial_record& r) {
    nlohmann::ordered_json j;
    j["epsilon"] = r.epsilon;
    j["delta"] = r.delta;
    j["seed"] = r.seed;
    j["estimate"] = r.estimate ? nlohmann::ordered_json(*r.estimate) : nullptr;
    j["truth"] = r.truth ? nlohmann::ordered_json(*r.truth) : nullptr;
    j["success"] = r.success ? nlohmann::ordered_json(*r.success) : nullptr;
    j["oracle_calls"] = r.oracle_calls;
    j["transition_calls"] = r.transition_calls;
    j["reward_calls"] = r.reward_calls;
    j["depth"] = r.depth;
    j["wall_time_ms"] = r.wall_time_ms;
    return j;
}

inline std::string report_to_json(const std::vector<trial_record>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    return arr.dump(2) + "\n";
}

inline std::string report_to_string(const std::vector<trial_record>& records,
                                    const std::string& format) {
    if (format == "csv") return report_to_csv(records);
    if (format == "json") return report_to_json(records);
    throw validation_error("unknown report format \"" + format + "\"");
}

inline void emit_report(const std::vector<trial_record>& records, const std::string& format,
                        const std::string& path) {
    require(!records.empty(), "refusing to emit an empty report");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << report_to_string(records, format);
    if (!out) throw std::runtime_error("write failed: " + path);
}

// --- report parsing (for the fit subcommand and round-trip checks) ---------

inline double parse_double_field(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw validation_error("bad numeric field \"" + s + "\"");
    return v;
}

inline std::vector<trial_record> parse_report_csv(const std::string& text) {
    std::vector<trial_record> records;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("empty report");
    if (line != report_columns()) throw validation_error("unexpected report header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        if (fields.size() != 11) throw validation_error("bad report row: " + line);
        trial_record r;
        r.epsilon = parse_double_field(fields[0]);
        r.delta = parse_double_field(fields[1]);
        r.seed = static_cast<std::uint64_t>(std::stoull(fields[2]));
        if (!fields[3].empty()) r.estimate = parse_double_field(fields[3]);
        if (!fields[4].empty()) r.truth = parse_double_field(fields[4]);
        if (!fields[5].empty()) r.success = fields[5] == "true";
        r.oracle_calls = std::stoull(fields[6]);
        r.transition_calls = std::stoull(fields[7]);
        r.reward_calls = std::stoull(fields[8]);
        r.depth = std::stoi(fields[9]);
        r.wall_time_ms = parse_double_field(fields[10]);
        records.push_back(r);
    }
    return records;
}

inline std::vector<trial_record> parse_report_json(const std::string& text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("cannot parse report json: ") + e.what());
    }
    std::vector<trial_record> records;
    for (const auto& j : arr) {
        trial_record r;
        r.epsilon = j.at("epsilon").get<double>();
        r.delta = j.at("delta").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("estimate").is_null()) r.estimate = j.at("estimate").get<double>();
        if (!j.at("truth").is_null()) r.truth = j.at("truth").get<double>();
        if (!j.at("success").is_null()) r.success = j.at("success").get<bool>();
        r.oracle_calls = j.at("oracle_calls").get<std::uint64_t>();
        r.transition_calls = j.at("transition_calls").get<std::uint64_t>();
        r.reward_calls = j.at("reward_calls").get<std::uint64_t>();
        r.depth = j.at("depth").get<int>();
        r.wall_time_ms = j.at("wall_time_ms").get<double>();
        records.push_back(r);
    }
    return records;
}

}  // namespace trailblazer
