#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "topoplan/error.hpp"

namespace topoplan {

// One geographic unit: an opaque id, an integer population and nonnegative
// real vote attributes (vote counts may be fractional after disaggregation).
struct node_record {
    std::string id;
    long long population = 0;
    std::map<std::string, double> attributes;
};

// Unit-level adjacency graph of a state. Immutable after construction;
// edges are stored with the smaller node index first.
struct dual_graph {
    std::vector<node_record> nodes;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;
    std::unordered_map<std::string, int> index_of;
    long long total_population = 0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

// Assignment of every unit to one of k districts, with the tolerance it was
// validated under. ideal_size = p(G)/k.
struct plan {
    std::vector<int> assignment;
    int k = 0;
    double epsilon = 0.0;
    double ideal_size = 0.0;
};

// Quotient graph of a plan: one vertex per district, an edge wherever some
// unit edge crosses between two districts, plus aggregated attributes.
// `filtration` stays empty until a share function is applied.
struct district_graph {
    int k = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;
    std::vector<long long> population;
    std::map<std::string, std::vector<double>> attribute_totals;
    std::vector<double> filtration;
};

namespace detail {

inline std::vector<std::vector<int>> adjacency_of(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

// BFS reachability count from `start` over vertices where mask[v] == value.
template <typename Mask>
inline int reach_count(const std::vector<std::vector<int>>& adj, int start, const Mask& mask,
                       int value) {
    std::vector<int> stack{start};
    std::vector<char> seen(adj.size(), 0);
    seen[start] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[v]) {
            if (!seen[u] && mask[u] == value) {
                seen[u] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count;
}

} // namespace detail

// Builds and validates the unit dual graph: unique ids, existing endpoints,
// no self-loops or duplicate edges, nonnegative weights, connected.
inline dual_graph build_dual_graph(std::vector<node_record> nodes,
                                   const std::vector<std::pair<std::string, std::string>>& edges) {
    dual_graph g;
    g.nodes = std::move(nodes);
    g.index_of.reserve(g.nodes.size());
    for (int i = 0; i < g.node_count(); ++i) {
        const auto& n = g.nodes[i];
        if (!g.index_of.emplace(n.id, i).second)
            throw error(errc::duplicate_node, "duplicate node id '" + n.id + "'", i);
        if (n.population < 0)
            throw error(errc::negative_attribute, "negative population at node '" + n.id + "'", i);
        for (const auto& [name, value] : n.attributes)
            if (value < 0)
                throw error(errc::negative_attribute,
                            "negative attribute '" + name + "' at node '" + n.id + "'", i);
        g.total_population += n.population;
    }

    std::unordered_set<long long> seen_edges;
    g.edges.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        auto ia = g.index_of.find(a);
        auto ib = g.index_of.find(b);
        if (ia == g.index_of.end())
            throw error(errc::unknown_edge_endpoint, "edge endpoint '" + a + "' is not a node");
        if (ib == g.index_of.end())
            throw error(errc::unknown_edge_endpoint, "edge endpoint '" + b + "' is not a node");
        int u = ia->second, v = ib->second;
        if (u == v) throw error(errc::duplicate_edge, "self-loop at node '" + a + "'", u);
        if (u > v) std::swap(u, v);
        long long key = static_cast<long long>(u) * g.node_count() + v;
        if (!seen_edges.insert(key).second)
            throw error(errc::duplicate_edge, "duplicate edge " + a + "--" + b, u);
        g.edges.emplace_back(u, v);
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.adjacency = detail::adjacency_of(g.node_count(), g.edges);

    if (g.node_count() == 0) throw error(errc::disconnected, "empty graph");
    std::vector<int> all(g.node_count(), 0);
    if (detail::reach_count(g.adjacency, 0, all, 0) != g.node_count())
        throw error(errc::disconnected, "unit dual graph is not connected");
    return g;
}

// Validates a total assignment against contiguity and the population balance
// condition (1-eps) p(G)/k <= p(P_i) <= (1+eps) p(G)/k.
inline plan validate_plan(const dual_graph& g, const std::vector<int>& assignment, int k,
                          double epsilon) {
    if (k < 2) throw error(errc::invalid_config, "k must be at least 2");
    if (static_cast<int>(assignment.size()) != g.node_count())
        throw error(errc::missing_node, "assignment does not cover every node");

    std::vector<long long> pop(k, 0);
    std::vector<int> first_member(k, -1);
    std::vector<int> size(k, 0);
    for (int v = 0; v < g.node_count(); ++v) {
        int d = assignment[v];
        if (d < 0 || d >= k)
            throw error(errc::missing_node, "node '" + g.nodes[v].id + "' assigned outside 0..k-1", v);
        pop[d] += g.nodes[v].population;
        if (first_member[d] < 0) first_member[d] = v;
        ++size[d];
    }

    const long double total = static_cast<long double>(g.total_population);
    const long double lo = (1.0L - epsilon) * total / k;
    const long double hi = (1.0L + epsilon) * total / k;
    for (int d = 0; d < k; ++d) {
        if (first_member[d] < 0)
            throw error(errc::district_disconnected, "district " + std::to_string(d) + " is empty", d);
        if (static_cast<long double>(pop[d]) < lo || static_cast<long double>(pop[d]) > hi) {
            double share = static_cast<double>(pop[d] * k) / static_cast<double>(g.total_population);
            throw error(errc::population_imbalance,
                        "district " + std::to_string(d) + " holds " + std::to_string(share) +
                            " of ideal size",
                        d);
        }
        if (detail::reach_count(g.adjacency, first_member[d], assignment, d) != size[d])
            throw error(errc::district_disconnected,
                        "district " + std::to_string(d) + " is not connected", d);
    }

    plan p;
    p.assignment = assignment;
    p.k = k;
    p.epsilon = epsilon;
    p.ideal_size = static_cast<double>(g.total_population) / k;
    return p;
}

// Quotient of g under the plan, with per-district population and attribute
// sums. Filtration is left unset.
inline district_graph build_district_graph(const dual_graph& g, const plan& p) {
    district_graph dg;
    dg.k = p.k;
    dg.population.assign(p.k, 0);
    for (int v = 0; v < g.node_count(); ++v) {
        int d = p.assignment[v];
        dg.population[d] += g.nodes[v].population;
        for (const auto& [name, value] : g.nodes[v].attributes) {
            auto& totals = dg.attribute_totals[name];
            if (totals.empty()) totals.assign(p.k, 0.0);
            totals[d] += value;
        }
    }
    std::set<std::pair<int, int>> cross;
    for (auto [u, v] : g.edges) {
        int a = p.assignment[u], b = p.assignment[v];
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        cross.emplace(a, b);
    }
    dg.edges.assign(cross.begin(), cross.end());
    dg.adjacency = detail::adjacency_of(p.k, dg.edges);
    return dg;
}

// Republican two-party share per district, stored as the filtration.
inline std::vector<double> republican_share(district_graph& dg, const std::string& rep_attr,
                                            const std::string& dem_attr) {
    auto rep_it = dg.attribute_totals.find(rep_attr);
    auto dem_it = dg.attribute_totals.find(dem_attr);
    if (rep_it == dg.attribute_totals.end() || dem_it == dg.attribute_totals.end())
        throw error(errc::invalid_config, "vote attributes '" + rep_attr + "'/'" + dem_attr +
                                              "' not present in graph");
    std::vector<double> shares(dg.k);
    for (int d = 0; d < dg.k; ++d) {
        double r = rep_it->second[d], dem = dem_it->second[d];
        if (r + dem <= 0.0)
            throw error(errc::zero_turnout_district,
                        "district " + std::to_string(d) + " has zero two-party turnout", d);
        shares[d] = r / (r + dem);
    }
    dg.filtration = shares;
    return shares;
}

// Statewide two-party Republican share across all units.
inline double statewide_share(const dual_graph& g, const std::string& rep_attr,
                              const std::string& dem_attr) {
    double r = 0, d = 0;
    for (const auto& n : g.nodes) {
        auto ri = n.attributes.find(rep_attr);
        auto di = n.attributes.find(dem_attr);
        if (ri != n.attributes.end()) r += ri->second;
        if (di != n.attributes.end()) d += di->second;
    }
    if (r + d <= 0) throw error(errc::zero_turnout_district, "no statewide two-party votes");
    return r / (r + d);
}

} // namespace topoplan
