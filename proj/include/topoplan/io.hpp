#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "topoplan/analysis.hpp"
#include "topoplan/chains.hpp"
#include "topoplan/error.hpp"
#include "topoplan/frechet.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/persistence.hpp"

namespace topoplan {

// Shortest decimal that round-trips a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot open '" + path + "' for writing");
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace detail

// --- graph JSON ---------------------------------------------------------
// { "nodes": [{"id","population","attributes":{..}}], "edges": [["a","b"],..] }

inline dual_graph load_graph_json(const std::string& path) {
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::io_error, "bad graph JSON in '" + path + "': " + e.what());
    }
    std::vector<node_record> nodes;
    for (const auto& jn : j.at("nodes")) {
        node_record n;
        n.id = jn.at("id").get<std::string>();
        n.population = jn.at("population").get<long long>();
        if (jn.contains("attributes"))
            for (auto it = jn["attributes"].begin(); it != jn["attributes"].end(); ++it)
                n.attributes[it.key()] = it.value().get<double>();
        nodes.push_back(std::move(n));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& je : j.at("edges"))
        edges.emplace_back(je.at(0).get<std::string>(), je.at(1).get<std::string>());
    return build_dual_graph(std::move(nodes), edges);
}

inline void save_graph_json(const dual_graph& g, const std::string& path) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["population"] = n.population;
        jn["attributes"] = nlohmann::json::object();
        for (const auto& [name, value] : n.attributes) jn["attributes"][name] = value;
        j["nodes"].push_back(std::move(jn));
    }
    j["edges"] = nlohmann::json::array();
    for (auto [u, v] : g.edges)
        j["edges"].push_back({g.nodes[u].id, g.nodes[v].id});
    detail::open_output(path) << j.dump(1) << "\n";
}

// --- plan CSV (node_id,district) -----------------------------------------

inline void save_plan_csv(const dual_graph& g, const plan& p, const std::string& path) {
    auto out = detail::open_output(path);
    out << "node_id,district\n";
    for (int v = 0; v < g.node_count(); ++v)
        out << g.nodes[v].id << "," << p.assignment[v] << "\n";
}

inline plan load_plan_csv(const dual_graph& g, const std::string& path, int k, double epsilon) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("node_id,district", 0) != 0)
        throw error(errc::io_error, "plan CSV '" + path + "' lacks node_id,district header");
    std::vector<int> assignment(g.node_count(), -1);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw error(errc::io_error, "malformed plan row: " + line);
        auto it = g.index_of.find(fields[0]);
        if (it == g.index_of.end())
            throw error(errc::missing_node, "unknown node id '" + fields[0] + "'");
        if (assignment[it->second] != -1)
            throw error(errc::duplicate_node, "node '" + fields[0] + "' assigned twice");
        assignment[it->second] = std::stoi(fields[1]);
    }
    for (int v = 0; v < g.node_count(); ++v)
        if (assignment[v] < 0)
            throw error(errc::missing_node, "node '" + g.nodes[v].id + "' missing from plan");
    return validate_plan(g, assignment, k, epsilon);
}

// --- diagram CSV (birth,death,anchor; death may be `inf`) -----------------

inline void save_diagram_csv(const diagram& d, const std::string& path) {
    auto out = detail::open_output(path);
    out << "birth,death,anchor\n";
    for (const auto& pt : d.points)
        out << format_double(pt.birth) << ","
            << (pt.infinite() ? "inf" : format_double(pt.death)) << "," << pt.anchor << "\n";
}

inline diagram load_diagram_csv(const std::string& path, int k = 0) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("birth,death,anchor", 0) != 0)
        throw error(errc::io_error, "diagram CSV '" + path + "' lacks birth,death,anchor header");
    diagram d;
    d.k = k;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 3) throw error(errc::io_error, "malformed diagram row: " + line);
        diagram_point pt;
        pt.birth = std::stod(fields[0]);
        pt.death = fields[1] == "inf" ? death_infinity : std::stod(fields[1]);
        pt.anchor = std::stoi(fields[2]);
        d.points.push_back(pt);
    }
    return d;
}

inline void save_overlay_csv(const std::vector<overlay_point>& points, const std::string& path) {
    auto out = detail::open_output(path);
    out << "plan,birth,death,anchor\n";
    for (const auto& pt : points)
        out << pt.plan_id << "," << format_double(pt.birth) << ","
            << (std::isinf(pt.death) ? "inf" : format_double(pt.death)) << "," << pt.anchor
            << "\n";
}

// --- distance matrix CSV ---------------------------------------------------

inline void save_matrix_csv(const std::vector<std::string>& ids,
                            const std::vector<std::vector<double>>& matrix,
                            const std::string& path) {
    auto out = detail::open_output(path);
    out << "plan";
    for (const auto& id : ids) out << "," << id;
    out << "\n";
    for (size_t i = 0; i < matrix.size(); ++i) {
        out << ids[i];
        for (double v : matrix[i]) out << "," << format_double(v);
        out << "\n";
    }
}

inline void save_heatmap_csv(const dual_graph& g, const heat_map& map, const std::string& path) {
    auto out = detail::open_output(path);
    out << "unit_id,frequency\n";
    if (map.frequency.empty()) return; // undefined: header only
    for (int v = 0; v < g.node_count(); ++v)
        out << g.nodes[v].id << "," << format_double(map.frequency[v]) << "\n";
}

// --- ensemble directory ------------------------------------------------
// manifest.json plus one plan CSV per retained state.

inline std::string plan_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "plan_%06d.csv", index);
    return buf;
}

inline void save_ensemble(const dual_graph& g, const ensemble& e, const std::string& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["kind"] = e.kind;
    manifest["rng_seed"] = e.rng_seed;
    manifest["steps"] = e.steps;
    manifest["proposals"] = e.proposals;
    manifest["accepted"] = e.accepted;
    manifest["subsample_interval"] = e.config.subsample_interval;
    manifest["epsilon"] = e.config.epsilon;
    manifest["max_resplit_attempts"] = e.config.max_resplit_attempts;
    manifest["step_proposal_budget"] = e.config.step_proposal_budget;
    manifest["k"] = e.plans.empty() ? 0 : e.plans.front().k;
    manifest["plans"] = nlohmann::json::array();
    for (size_t i = 0; i < e.plans.size(); ++i) {
        std::string name = plan_file_name(static_cast<int>(i));
        save_plan_csv(g, e.plans[i], dir + "/" + name);
        manifest["plans"].push_back(name);
    }
    detail::open_output(dir + "/manifest.json") << manifest.dump(1) << "\n";
}

inline ensemble load_ensemble(const dual_graph& g, const std::string& dir) {
    auto in = detail::open_input(dir + "/manifest.json");
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::io_error, std::string("bad manifest: ") + e.what());
    }
    ensemble e;
    e.kind = manifest.at("kind").get<std::string>();
    e.rng_seed = manifest.at("rng_seed").get<uint64_t>();
    e.steps = manifest.at("steps").get<long>();
    e.proposals = manifest.at("proposals").get<long>();
    e.accepted = manifest.at("accepted").get<long>();
    e.config.subsample_interval = manifest.at("subsample_interval").get<long>();
    e.config.epsilon = manifest.at("epsilon").get<double>();
    e.config.rng_seed = e.rng_seed;
    const int k = manifest.at("k").get<int>();
    for (const auto& name : manifest.at("plans"))
        e.plans.push_back(load_plan_csv(g, dir + "/" + name.get<std::string>(), k,
                                        e.config.epsilon));
    return e;
}

// --- experiment configuration -------------------------------------------

struct election_spec {
    std::string name, rep_attr, dem_attr;
};

struct experiment_config {
    std::string graph_path;
    int k = 2;
    double epsilon = 0.02;
    std::vector<election_spec> elections;
    chain_config chain;
    std::string bias_election;         // empty: no bias section
    std::string bias_favored = "democratic";
    double safe_threshold = 0.53;
    double beta = 2.0;
    double min_persistence = 0.05;
    int frechet_seeds = 20;
    int frechet_max_iter = 200;
    double frechet_tol = 1e-8;
    std::string matching_mode = "optimal_l2";
    std::string out_dir;
    uint64_t seed = 0;
    std::string initial_plan; // optional CSV path
};

inline experiment_config load_config(const std::string& path) {
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::invalid_config, std::string("bad config JSON: ") + e.what());
    }
    experiment_config cfg;
    try {
        cfg.graph_path = j.at("graph").get<std::string>();
        cfg.k = j.at("k").get<int>();
        cfg.epsilon = j.value("epsilon", 0.02);
        for (const auto& je : j.at("elections"))
            cfg.elections.push_back({je.at("name").get<std::string>(),
                                     je.at("republican").get<std::string>(),
                                     je.at("democratic").get<std::string>()});
        cfg.seed = j.value("seed", uint64_t{0});
        if (j.contains("chain")) {
            const auto& jc = j["chain"];
            cfg.chain.steps = jc.value("steps", long{1000});
            cfg.chain.subsample_interval = jc.value("subsample_interval", long{50});
            cfg.chain.rng_seed = jc.value("rng_seed", cfg.seed);
            cfg.chain.max_resplit_attempts = jc.value("max_resplit_attempts", 100);
            cfg.chain.step_proposal_budget = jc.value("step_proposal_budget", 10000);
        } else {
            cfg.chain.rng_seed = cfg.seed;
        }
        cfg.chain.epsilon = cfg.epsilon;
        if (j.contains("bias")) {
            const auto& jb = j["bias"];
            cfg.bias_election = jb.at("election").get<std::string>();
            cfg.bias_favored = jb.value("favored", std::string("democratic"));
            cfg.safe_threshold = jb.value("safe_threshold", 0.53);
            cfg.beta = jb.value("beta", 2.0);
        }
        if (j.contains("analysis")) {
            const auto& ja = j["analysis"];
            cfg.min_persistence = ja.value("min_persistence", 0.05);
            cfg.frechet_seeds = ja.value("frechet_seeds", 20);
            cfg.frechet_max_iter = ja.value("frechet_max_iter", 200);
            cfg.frechet_tol = ja.value("frechet_tol", 1e-8);
            cfg.matching_mode = ja.value("matching_mode", std::string("optimal_l2"));
        }
        cfg.out_dir = j.value("out", std::string("out"));
        cfg.initial_plan = j.value("initial_plan", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::invalid_config, std::string("config field error: ") + e.what());
    }
    return cfg;
}

inline const election_spec& find_election(const experiment_config& cfg, const std::string& name) {
    for (const auto& e : cfg.elections)
        if (e.name == name) return e;
    throw error(errc::invalid_config, "election '" + name + "' not found in config");
}

// Checks that every referenced attribute exists somewhere in the graph and
// that basic parameters are sane.
inline void validate_config(const experiment_config& cfg, const dual_graph& g) {
    if (cfg.k < 2) throw error(errc::invalid_config, "k must be at least 2");
    if (!(cfg.epsilon > 0 && cfg.epsilon < 1))
        throw error(errc::invalid_config, "epsilon must lie in (0,1)");
    if (cfg.elections.empty()) throw error(errc::invalid_config, "no elections configured");
    auto has_attr = [&](const std::string& name) {
        for (const auto& n : g.nodes)
            if (n.attributes.count(name)) return true;
        return false;
    };
    for (const auto& e : cfg.elections) {
        if (!has_attr(e.rep_attr))
            throw error(errc::invalid_config, "attribute '" + e.rep_attr + "' not in graph");
        if (!has_attr(e.dem_attr))
            throw error(errc::invalid_config, "attribute '" + e.dem_attr + "' not in graph");
    }
    if (!cfg.bias_election.empty()) find_election(cfg, cfg.bias_election);
    if (cfg.matching_mode != "optimal_l2" && cfg.matching_mode != "geographic")
        throw error(errc::invalid_config, "matching_mode must be optimal_l2 or geographic");
}

} // namespace topoplan
