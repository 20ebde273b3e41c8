// Command-line harness: single plans, PAC grid experiments, difficulty
// reports and complexity-exponent fits over the planners in the library.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "trailblazer/trailblazer.hpp"

namespace tb = trailblazer;

namespace {

struct model_options {
    std::string mdp_file;
    std::string random_spec;  // SEED,K,N,S
    std::string toy_spec;     // bounded_gap(0.3) | power_law(3,1)
    double toy_gamma = 0.002;
    std::uint64_t toy_seed = 0;
    double sparsity = 0.0;
    double random_gamma = 0.5;
};

void add_model_flags(CLI::App* cmd, model_options& opt) {
    auto* mdp = cmd->add_option("--mdp", opt.mdp_file, "load a tabular MDP from a json file");
    auto* rnd = cmd->add_option("--random", opt.random_spec,
                                "generate a tabular MDP from SEED,K,N,S "
                                "(actions, support, states)");
    auto* toy = cmd->add_option("--toy", opt.toy_spec,
                                "continuous-transition model: bounded_gap(D) or power_law(B,C)");
    cmd->add_option("--toy-gamma", opt.toy_gamma, "discount of the continuous model");
    cmd->add_option("--toy-seed", opt.toy_seed, "seed of the continuous model");
    cmd->add_option("--sparsity", opt.sparsity, "zero-reward probability for --random");
    cmd->add_option("--random-gamma", opt.random_gamma, "discount for --random");
    mdp->excludes(rnd)->excludes(toy);
    rnd->excludes(toy);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw tb::validation_error("empty list: \"" + text + "\"");
    return out;
}

using model_variant = std::variant<tb::tabular_mdp, tb::continuous_toy>;

model_variant build_model(const model_options& opt) {
    const int sources = (!opt.mdp_file.empty()) + (!opt.random_spec.empty()) +
                        (!opt.toy_spec.empty());
    if (sources != 1)
        throw tb::validation_error("exactly one of --mdp, --random, --toy is required");
    if (!opt.mdp_file.empty()) return tb::load_mdp(opt.mdp_file);
    if (!opt.random_spec.empty()) {
        const auto v = parse_list(opt.random_spec);
        if (v.size() != 4)
            throw tb::validation_error("--random needs SEED,K,N,S");
        return tb::make_random_mdp(static_cast<std::uint64_t>(v[0]), static_cast<int>(v[3]),
                                   static_cast<int>(v[1]), static_cast<int>(v[2]), opt.sparsity,
                                   opt.random_gamma);
    }
    const auto open = opt.toy_spec.find('(');
    const auto close = opt.toy_spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw tb::validation_error("cannot parse --toy \"" + opt.toy_spec + "\"");
    const std::string name = opt.toy_spec.substr(0, open);
    const auto args = parse_list(opt.toy_spec.substr(open + 1, close - open - 1));
    tb::gap_profile profile = tb::gap_profile::bounded_gap(0.3);
    if (name == "bounded_gap" && args.size() == 1)
        profile = tb::gap_profile::bounded_gap(args[0]);
    else if (name == "power_law" && args.size() == 2)
        profile = tb::gap_profile::power_law(args[0], args[1]);
    else
        throw tb::validation_error("cannot parse --toy \"" + opt.toy_spec + "\"");
    return tb::continuous_toy(opt.toy_seed, profile, opt.toy_gamma);
}

void write_or_print(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
}

int run_plan(const model_options& mopt, const std::string& planner, double eps, double delta,
             std::uint64_t seed, std::uint64_t cap, const tb::sparse_sampling_config& sparse,
             const std::string& out_path) {
    const auto model = build_model(mopt);
    const auto kind = tb::planner_from_name(planner);
    const auto result = std::visit(
        [&](const auto& m) {
            tb::planner_config cfg;
            cfg.gamma = m.discount();
            cfg.delta = delta;
            cfg.epsilon = eps;
            cfg.call_cap = cap;
            switch (kind) {
                case tb::planner_kind::sparse: return tb::sparse_plan(m, cfg, sparse, seed);
                case tb::planner_kind::monte_carlo: return tb::monte_carlo_plan(m, cfg, seed);
                default: return tb::plan(m, cfg, seed);
            }
        },
        model);
    write_or_print(tb::to_json(result).dump(2) + "\n", out_path);
    return 0;
}

int run_bench(const model_options& mopt, tb::experiment_spec spec, const std::string& out_path,
              const std::string& format) {
    const auto model = build_model(mopt);
    const auto records =
        std::visit([&](const auto& m) { return tb::run_pac_experiment(m, spec); }, model);
    write_or_print(tb::report_to_string(records, format), out_path);

    const auto cells = tb::summarize(records);
    bool budget_hit = false;
    for (const auto& c : cells) {
        std::cerr << "cell eps=" << c.epsilon << " delta=" << c.delta << ": " << c.trials
                  << " trials";
        if (c.judged > 0)
            std::cerr << ", failures " << c.failures << "/" << c.judged;
        std::cerr << ", mean calls " << c.mean_oracle_calls << "\n";
        budget_hit |= c.budget_hits > 0;
    }
    return budget_hit ? 3 : 0;
}

int run_analyze(const model_options& mopt, tb::difficulty_options opt,
                const std::string& out_path) {
    const auto model = build_model(mopt);
    const auto* mdp = std::get_if<tb::tabular_mdp>(&model);
    if (mdp == nullptr)
        throw tb::validation_error("difficulty analysis needs a tabular model");
    const auto report = tb::analyze_difficulty(*mdp, opt);
    write_or_print(tb::to_json(report).dump(2) + "\n", out_path);
    return 0;
}

int run_fit(const std::string& in_path, std::string format, const std::string& out_path) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw tb::validation_error("cannot open report: " + in_path);
    std::stringstream buf;
    buf << in.rdbuf();
    if (format.empty())
        format = in_path.size() > 5 && in_path.substr(in_path.size() - 5) == ".json" ? "json"
                                                                                     : "csv";
    const auto records =
        format == "json" ? tb::parse_report_json(buf.str()) : tb::parse_report_csv(buf.str());
    const auto fit = tb::fit_complexity_exponent(records);
    nlohmann::ordered_json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["slope_stderr"] = fit.slope_stderr;
    j["band"] = {fit.band_low(), fit.band_high()};
    j["residual_rms"] = fit.residual_rms;
    j["points"] = fit.points;
    write_or_print(j.dump(2) + "\n", out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sampling-based planning benchmark harness"};
    app.require_subcommand(1);

    model_options mopt;

    auto* plan_cmd = app.add_subcommand("plan", "run one planning call and print the result");
    std::string planner = "trailblazer";
    double eps = 0.1, delta = 0.1;
    std::uint64_t seed = 0, cap = 0;
    tb::sparse_sampling_config sparse;
    std::string out_path, format = "csv";
    add_model_flags(plan_cmd, mopt);
    plan_cmd->add_option("--planner", planner, "trailblazer | sparse | monte_carlo");
    plan_cmd->add_option("--eps", eps, "accuracy target");
    plan_cmd->add_option("--delta", delta, "failure probability");
    plan_cmd->add_option("--seed", seed, "rng seed");
    plan_cmd->add_option("--cap", cap, "oracle-call cap (0 = unlimited)");
    plan_cmd->add_option("--sparse-width", sparse.width, "samples per expansion (sparse)");
    plan_cmd->add_option("--sparse-horizon", sparse.horizon, "look-ahead depth (sparse)");
    plan_cmd->add_option("--out", out_path, "write the result here instead of stdout");

    auto* bench_cmd = app.add_subcommand("bench", "run a PAC grid experiment");
    std::string eps_list = "0.5", delta_list = "0.1";
    int trials = 10, threads = 1;
    bool timing = false;
    add_model_flags(bench_cmd, mopt);
    bench_cmd->add_option("--planner", planner, "trailblazer | sparse | monte_carlo");
    bench_cmd->add_option("--eps", eps_list, "comma-separated accuracy grid");
    bench_cmd->add_option("--delta", delta_list, "comma-separated failure-probability grid");
    bench_cmd->add_option("--trials", trials, "trials per cell");
    bench_cmd->add_option("--seed", seed, "base seed; trial i uses seed+i");
    bench_cmd->add_option("--cap", cap, "oracle-call cap per trial");
    bench_cmd->add_option("--sparse-width", sparse.width, "samples per expansion (sparse)");
    bench_cmd->add_option("--sparse-horizon", sparse.horizon, "look-ahead depth (sparse)");
    bench_cmd->add_option("--out", out_path, "report path (default stdout)");
    bench_cmd->add_option("--format", format, "csv | json");
    bench_cmd->add_option("--threads", threads, "parallel trials");
    bench_cmd->add_flag("--timing", timing,
                        "record wall times (reports stop being byte-reproducible)");

    auto* analyze_cmd = app.add_subcommand("analyze", "difficulty report for a tabular MDP");
    tb::difficulty_options dopt;
    std::string xi_list = "0.1", d_depth_list = "2,4";
    add_model_flags(analyze_cmd, mopt);
    analyze_cmd->add_option("--depth", dopt.tree_depth, "tree enumeration depth");
    analyze_cmd->add_option("--hcap", dopt.h_cap, "kappa fit depth cap (pairs)");
    analyze_cmd->add_option("--xi", xi_list, "comma-separated xi grid for the d estimate");
    analyze_cmd->add_option("--d-depths", d_depth_list, "comma-separated even depths");
    analyze_cmd->add_option("--d-samples", dopt.d_samples, "samples per depth");
    analyze_cmd->add_option("--d-seed", dopt.seed, "seed for the d estimate");
    analyze_cmd->add_option("--out", out_path, "report path (default stdout)");

    auto* fit_cmd = app.add_subcommand("fit", "complexity-exponent fit over an existing report");
    std::string in_path, fit_format;
    fit_cmd->add_option("--in", in_path, "report to fit (csv or json)")->required();
    fit_cmd->add_option("--format", fit_format, "override format detection");
    fit_cmd->add_option("--out", out_path, "write the fit here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(plan_cmd))
            return run_plan(mopt, planner, eps, delta, seed, cap, sparse, out_path);
        if (app.got_subcommand(bench_cmd)) {
            tb::experiment_spec spec;
            spec.eps_grid = parse_list(eps_list);
            spec.delta_grid = parse_list(delta_list);
            spec.trials = trials;
            spec.base_seed = seed;
            spec.call_cap = cap;
            spec.planner = tb::planner_from_name(planner);
            spec.sparse = sparse;
            spec.threads = threads;
            spec.record_timing = timing;
            return run_bench(mopt, spec, out_path, format);
        }
        if (app.got_subcommand(analyze_cmd)) {
            dopt.xi_grid = parse_list(xi_list);
            dopt.d_depths.clear();
            for (double d : parse_list(d_depth_list)) dopt.d_depths.push_back(static_cast<int>(d));
            return run_analyze(mopt, dopt, out_path);
        }
        if (app.got_subcommand(fit_cmd)) return run_fit(in_path, fit_format, out_path);
    } catch (const tb::budget_exceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const tb::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
