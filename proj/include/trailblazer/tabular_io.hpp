#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "trailblazer/errors.hpp"
#include "trailblazer/tabular.hpp"

namespace trailblazer {

using json = nlohmann::ordered_json;

/// File schema:
///   { "gamma": 0.9,
///     "root": {"kind": "max", "state": 0},
///     "states": [ { "actions": [ { "reward": {"type": "bernoulli", "p": 0.5},
///                                  "next": [ {"state": 1, "p": 0.25},
///                                            {"state": 2, "p": 0.75} ] } ] } ] }
/// Avg roots add "action"; constant rewards use {"type": "constant", "c": ...}.
inline json to_json(const tabular_mdp& mdp) {
    json j;
    j["gamma"] = mdp.gamma;
    json root;
    root["kind"] = mdp.root_node.kind == node_kind::max ? "max" : "avg";
    root["state"] = mdp.root_node.state;
    if (mdp.root_node.kind == node_kind::avg) root["action"] = mdp.root_node.action;
    j["root"] = root;
    json states = json::array();
    for (const auto& s : mdp.states) {
        json actions = json::array();
        for (const auto& a : s) {
            json act;
            json reward;
            if (a.reward.kind() == reward_dist::family::bernoulli) {
                reward["type"] = "bernoulli";
                reward["p"] = a.reward.param();
            } else {
                reward["type"] = "constant";
                reward["c"] = a.reward.param();
            }
            act["reward"] = reward;
            json next = json::array();
            for (const auto& e : a.next) next.push_back({{"state", e.state}, {"p", e.prob}});
            act["next"] = next;
            actions.push_back(act);
        }
        states.push_back({{"actions", actions}});
    }
    j["states"] = states;
    return j;
}

inline tabular_mdp mdp_from_json(const json& j) {
    tabular_mdp mdp;
    try {
        mdp.gamma = j.at("gamma").get<double>();
        if (j.contains("root")) {
            const auto& root = j.at("root");
            const std::string kind = root.value("kind", "max");
            if (kind == "max")
                mdp.root_node.kind = node_kind::max;
            else if (kind == "avg")
                mdp.root_node.kind = node_kind::avg;
            else
                throw validation_error("root kind must be \"max\" or \"avg\", got \"" + kind +
                                       "\"");
            mdp.root_node.state = root.value("state", 0);
            mdp.root_node.action = root.value("action", 0);
        }
        for (const auto& s : j.at("states")) {
            std::vector<tabular_action> actions;
            for (const auto& a : s.at("actions")) {
                tabular_action act;
                const auto& reward = a.at("reward");
                const std::string type = reward.at("type").get<std::string>();
                if (type == "bernoulli")
                    act.reward = reward_dist::bernoulli(reward.at("p").get<double>());
                else if (type == "constant")
                    act.reward = reward_dist::constant(reward.at("c").get<double>());
                else
                    throw validation_error("unknown reward type \"" + type + "\"");
                for (const auto& e : a.at("next"))
                    act.next.push_back(
                        {e.at("state").get<std::int32_t>(), e.at("p").get<double>()});
                actions.push_back(std::move(act));
            }
            mdp.states.push_back(std::move(actions));
        }
    } catch (const json::exception& e) {
        throw validation_error(std::string("malformed mdp json: ") + e.what());
    }
    mdp.validate();
    return mdp;
}

inline tabular_mdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open mdp file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw validation_error("cannot parse " + path + ": " + e.what());
    }
    return mdp_from_json(j);
}

inline void save_mdp(const tabular_mdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write mdp file: " + path);
    out << to_json(mdp).dump(2) << '\n';
}

}  // namespace trailblazer
