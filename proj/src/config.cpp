#include "dht/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dht/errors.hpp"
#include "dht/rng.hpp"

#include <json.hpp>

namespace dht {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where + ": missing required field '" + key + "'");
    return j.at(key);
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

std::int64_t as_int64(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<std::int64_t>();
}

double as_double(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

std::vector<double> as_double_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(as_double(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

std::vector<std::pair<int, int>> parse_edges(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of [from, to] pairs");
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& e = j[k];
        const std::string edge_where = where + "[" + std::to_string(k) + "]";
        if (!e.is_array() || e.size() != 2) throw ConfigError(edge_where + ": expected [from, to]");
        edges.emplace_back(as_int(e[0], edge_where), as_int(e[1], edge_where));
    }
    return edges;
}

DirectedGraph parse_one_graph(const json& j, int n, bool undirected, const std::string& where) {
    auto edges = parse_edges(require(j, "edges", where), where + ".edges");
    try {
        return undirected ? DirectedGraph::undirected(n, edges) : DirectedGraph(n, std::move(edges));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

HypothesisSet parse_hypotheses(const json& j) {
    HypothesisSet hypotheses;
    const auto& names = require(j, "names", "hypotheses");
    if (!names.is_array()) throw ConfigError("hypotheses.names: expected an array");
    for (std::size_t k = 0; k < names.size(); ++k)
        hypotheses.names.push_back(as_string(names[k], "hypotheses.names[" + std::to_string(k) + "]"));
    const std::string true_name = as_string(require(j, "true", "hypotheses"), "hypotheses.true");
    const auto it = std::find(hypotheses.names.begin(), hypotheses.names.end(), true_name);
    if (it == hypotheses.names.end())
        throw ConfigError("hypotheses.true: '" + true_name + "' is not a listed hypothesis");
    hypotheses.true_index = static_cast<int>(it - hypotheses.names.begin());
    return hypotheses;
}

AttackStrategy parse_strategy(const json& j, const std::string& where) {
    AttackStrategy strategy;
    const std::string name = as_string(require(j, "strategy", where), where + ".strategy");
    if (name == "fixed_belief") {
        strategy.kind = AttackKind::FixedBelief;
        strategy.belief = as_double_vector(require(j, "belief", where), where + ".belief");
        if (j.contains("start_time")) strategy.start_time = as_int64(j["start_time"], where + ".start_time");
    } else if (name == "random_belief") {
        strategy.kind = AttackKind::RandomBelief;
        if (j.contains("seed")) strategy.seed = j["seed"].get<std::uint64_t>();
    } else if (name == "per_edge") {
        strategy.kind = AttackKind::PerEdge;
        if (j.contains("start_time")) strategy.start_time = as_int64(j["start_time"], where + ".start_time");
        const auto& edges = require(j, "edges", where);
        if (!edges.is_object()) throw ConfigError(where + ".edges: expected recipient -> belief map");
        for (const auto& [key, value] : edges.items()) {
            int recipient;
            try {
                recipient = std::stoi(key);
            } catch (...) {
                throw ConfigError(where + ".edges: recipient key '" + key + "' is not an index");
            }
            strategy.per_edge[recipient] = as_double_vector(value, where + ".edges[" + key + "]");
        }
    } else if (name == "silent_conform") {
        strategy.kind = AttackKind::SilentConform;
    } else {
        throw ConfigError(where + ".strategy: unknown strategy '" + name + "'");
    }
    return strategy;
}

json canonical_strategy(int agent, const AttackStrategy& strategy) {
    json j;
    j["agent"] = agent;
    j["strategy"] = attack_kind_name(strategy.kind);
    switch (strategy.kind) {
        case AttackKind::FixedBelief:
            j["belief"] = strategy.belief;
            j["start_time"] = strategy.start_time;
            break;
        case AttackKind::RandomBelief:
            j["seed"] = strategy.seed;
            break;
        case AttackKind::PerEdge: {
            j["start_time"] = strategy.start_time;
            json edges = json::object();
            for (const auto& [recipient, belief] : strategy.per_edge)
                edges[std::to_string(recipient)] = belief;
            j["edges"] = std::move(edges);
            break;
        }
        case AttackKind::SilentConform: break;
    }
    return j;
}

json canonical_graph_entry(const DirectedGraph& g) {
    json entry;
    json edges = json::array();
    for (auto [from, to] : g.edges()) edges.push_back(json::array({from, to}));
    entry["edges"] = std::move(edges);
    return entry;
}

json canonicalize(const LoadedConfig& config) {
    const SimulationConfig& sim = config.sim;
    json root;

    json hypotheses;
    hypotheses["names"] = sim.model.hypotheses.names;
    hypotheses["true"] = sim.model.hypotheses.names[sim.model.hypotheses.true_index];
    root["hypotheses"] = std::move(hypotheses);

    json agents = json::array();
    for (const auto& agent : sim.model.agents) {
        json a;
        a["signals"] = agent.signal_names;
        a["rows"] = agent.table;
        agents.push_back(std::move(a));
    }
    root["agents"] = std::move(agents);

    json graph;
    graph["n"] = sim.schedule.agent_count();
    graph["window"] = config.window;
    switch (sim.schedule.kind()) {
        case GraphSchedule::Kind::Static:
            graph["kind"] = "static";
            graph["edges"] = canonical_graph_entry(sim.schedule.graph_at(0))["edges"];
            break;
        case GraphSchedule::Kind::Periodic:
        case GraphSchedule::Kind::Explicit: {
            graph["kind"] = sim.schedule.kind() == GraphSchedule::Kind::Periodic ? "periodic" : "explicit";
            json sequence = json::array();
            for (std::int64_t k = 0; k < sim.schedule.sequence_length(); ++k)
                sequence.push_back(canonical_graph_entry(sim.schedule.graph_at(k)));
            graph["sequence"] = std::move(sequence);
            break;
        }
    }
    root["graph"] = std::move(graph);

    json rule;
    rule["name"] = rule_kind_name(sim.rule.kind);
    if (sim.rule.kind == RuleKind::Lfrhe) rule["f"] = sim.rule.max_faulty;
    root["rule"] = std::move(rule);

    json byzantine = json::array();
    for (const auto& [agent, strategy] : sim.adversary.byzantine)
        byzantine.push_back(canonical_strategy(agent, strategy));
    root["adversary"] = json{{"byzantine", std::move(byzantine)}};

    json run;
    run["horizon"] = sim.horizon;
    run["seed"] = sim.seed;
    run["stride"] = sim.record.stride;
    if (sim.priors)
        run["priors"] = *sim.priors;
    else
        run["priors"] = "uniform";
    root["run"] = std::move(run);

    json metrics;
    metrics["probe_agent"] = config.probe_agent;
    if (config.probe_epsilon)
        metrics["probe_epsilon"] = *config.probe_epsilon;
    else
        metrics["probe_epsilon"] = nullptr;
    metrics["rate_band"] = config.rate_band;
    root["metrics"] = std::move(metrics);

    return root;
}

}  // namespace

CertifySpec LoadedConfig::certify_spec() const {
    CertifySpec spec;
    switch (sim.rule.kind) {
        case RuleKind::Lfrhe:
            spec.mode = CertifyMode::Lfrhe;
            spec.max_faulty = sim.rule.max_faulty;
            break;
        case RuleKind::MinRule:
        case RuleKind::Linear:
        case RuleKind::LogLinear:
            if (sim.schedule.is_static()) {
                spec.mode = CertifyMode::MinRuleStatic;
            } else {
                spec.mode = CertifyMode::MinRuleTimeVarying;
                spec.window = window;
            }
            break;
    }
    return spec;
}

LoadedConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

    LoadedConfig config;
    SimulationConfig& sim = config.sim;

    sim.model.hypotheses = parse_hypotheses(require(root, "hypotheses", origin));

    const auto& agents = require(root, "agents", origin);
    if (!agents.is_array() || agents.empty())
        throw ConfigError("agents: expected a non-empty array");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string where = "agents[" + std::to_string(i) + "]";
        AgentLikelihood agent;
        const auto& names = require(agents[i], "signals", where);
        if (!names.is_array()) throw ConfigError(where + ".signals: expected an array");
        for (std::size_t k = 0; k < names.size(); ++k)
            agent.signal_names.push_back(as_string(names[k], where + ".signals[" + std::to_string(k) + "]"));
        const auto& rows = require(agents[i], "rows", where);
        if (!rows.is_array()) throw ConfigError(where + ".rows: expected an array of rows");
        for (std::size_t p = 0; p < rows.size(); ++p)
            agent.table.push_back(as_double_vector(rows[p], where + ".rows[" + std::to_string(p) + "]"));
        sim.model.agents.push_back(std::move(agent));
    }
    try {
        sim.model.validate_and_normalize();
    } catch (const ModelError& e) {
        throw ConfigError(e.what());
    }

    const auto& graph = require(root, "graph", origin);
    const int n = as_int(require(graph, "n", "graph"), "graph.n");
    const bool undirected = graph.contains("undirected") && graph["undirected"].get<bool>();
    if (graph.contains("edges")) {
        sim.schedule = GraphSchedule::static_graph(parse_one_graph(graph, n, undirected, "graph"));
        config.window = 1;
    } else if (graph.contains("periodic") || graph.contains("explicit")) {
        const bool periodic = graph.contains("periodic");
        const auto& sequence = graph[periodic ? "periodic" : "explicit"];
        if (!sequence.is_array() || sequence.empty())
            throw ConfigError("graph: schedule sequence must be a non-empty array");
        std::vector<DirectedGraph> graphs;
        for (std::size_t k = 0; k < sequence.size(); ++k)
            graphs.push_back(parse_one_graph(sequence[k], n, undirected,
                                             "graph.sequence[" + std::to_string(k) + "]"));
        sim.schedule = periodic ? GraphSchedule::periodic(std::move(graphs))
                                : GraphSchedule::explicit_list(std::move(graphs));
        config.window = static_cast<int>(sequence.size());
    } else {
        throw ConfigError("graph: need 'edges', 'periodic', or 'explicit'");
    }
    if (graph.contains("window")) {
        config.window = as_int(graph["window"], "graph.window");
        if (config.window < 1) throw ConfigError("graph.window: must be >= 1");
    }

    const auto& rule = require(root, "rule", origin);
    const std::string rule_name = as_string(require(rule, "name", "rule"), "rule.name");
    if (rule_name == "min_rule") {
        sim.rule.kind = RuleKind::MinRule;
    } else if (rule_name == "lfrhe") {
        sim.rule.kind = RuleKind::Lfrhe;
        sim.rule.max_faulty = as_int(require(rule, "f", "rule"), "rule.f");
    } else if (rule_name == "linear") {
        sim.rule.kind = RuleKind::Linear;
    } else if (rule_name == "loglinear") {
        sim.rule.kind = RuleKind::LogLinear;
    } else {
        throw ConfigError("rule.name: unknown rule '" + rule_name + "'");
    }

    if (root.contains("adversary") && !root["adversary"].is_null()) {
        const auto& byzantine = require(root["adversary"], "byzantine", "adversary");
        if (!byzantine.is_array()) throw ConfigError("adversary.byzantine: expected an array");
        for (std::size_t k = 0; k < byzantine.size(); ++k) {
            const std::string where = "adversary.byzantine[" + std::to_string(k) + "]";
            const int agent = as_int(require(byzantine[k], "agent", where), where + ".agent");
            if (sim.adversary.contains(agent))
                throw ConfigError(where + ".agent: duplicate Byzantine agent " + std::to_string(agent));
            sim.adversary.byzantine[agent] = parse_strategy(byzantine[k], where);
        }
    }

    const auto& run = require(root, "run", origin);
    sim.horizon = as_int64(require(run, "horizon", "run"), "run.horizon");
    if (run.contains("seed")) sim.seed = run["seed"].get<std::uint64_t>();
    if (run.contains("stride")) sim.record.stride = as_int64(run["stride"], "run.stride");
    if (run.contains("priors") && !run["priors"].is_null()) {
        const auto& priors = run["priors"];
        if (priors.is_string()) {
            if (priors.get<std::string>() != "uniform")
                throw ConfigError("run.priors: expected 'uniform' or a table");
        } else if (priors.is_array()) {
            std::vector<std::vector<double>> table;
            for (std::size_t i = 0; i < priors.size(); ++i)
                table.push_back(as_double_vector(priors[i], "run.priors[" + std::to_string(i) + "]"));
            sim.priors = std::move(table);
        } else {
            throw ConfigError("run.priors: expected 'uniform' or a table");
        }
    }

    if (root.contains("metrics")) {
        const auto& metrics = root["metrics"];
        if (metrics.contains("probe_agent"))
            config.probe_agent = as_int(metrics["probe_agent"], "metrics.probe_agent");
        if (metrics.contains("probe_epsilon") && !metrics["probe_epsilon"].is_null())
            config.probe_epsilon = as_double(metrics["probe_epsilon"], "metrics.probe_epsilon");
        if (metrics.contains("rate_band"))
            config.rate_band = as_double(metrics["rate_band"], "metrics.rate_band");
    }
    if (config.probe_agent < 0 || config.probe_agent >= sim.model.agent_count())
        throw ConfigError("metrics.probe_agent: agent index out of range");

    sim.validate();

    config.canonical_text = canonicalize(config).dump();
    char digest_hex[17];
    std::snprintf(digest_hex, sizeof digest_hex, "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(config.canonical_text.data(), config.canonical_text.size())));
    config.digest_hex = digest_hex;
    return config;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

}  // namespace dht
