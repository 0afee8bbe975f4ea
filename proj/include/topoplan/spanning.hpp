#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/rng.hpp"

namespace topoplan {

// Uniform spanning tree of the induced subgraph on `subset` by Wilson's
// loop-erased random walk. Edges are returned as (walk vertex, successor)
// pairs of global node indices.
inline std::vector<std::pair<int, int>> random_spanning_tree(const dual_graph& g,
                                                             const std::vector<int>& subset,
                                                             rng& r) {
    const int n = static_cast<int>(subset.size());
    if (n == 0) throw error(errc::disconnected_subset, "empty subset");

    std::vector<int> local(g.node_count(), -1);
    for (int i = 0; i < n; ++i) local[subset[i]] = i;

    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int u : g.adjacency[subset[i]])
            if (local[u] >= 0) adj[i].push_back(local[u]);

    if (detail::reach_count(adj, 0, std::vector<int>(n, 0), 0) != n)
        throw error(errc::disconnected_subset, "subset does not induce a connected subgraph");

    std::vector<char> in_tree(n, 0);
    std::vector<int> successor(n, -1);
    in_tree[0] = 1;
    std::vector<std::pair<int, int>> tree;
    tree.reserve(n - 1);

    for (int start = 1; start < n; ++start) {
        if (in_tree[start]) continue;
        int v = start;
        while (!in_tree[v]) {
            successor[v] = adj[v][r.below(adj[v].size())];
            v = successor[v];
        }
        v = start;
        while (!in_tree[v]) {
            in_tree[v] = 1;
            tree.emplace_back(subset[v], subset[successor[v]]);
            v = successor[v];
        }
    }
    return tree;
}

namespace detail {

struct rooted_tree {
    std::vector<int> members;            // participating global node ids
    std::vector<int> local;              // global -> local or -1
    std::vector<std::vector<int>> adj;   // local adjacency
    std::vector<int> parent;             // local parent (-1 at root)
    std::vector<int> order;              // preorder of locals
};

inline rooted_tree root_tree(const dual_graph& g, const std::vector<std::pair<int, int>>& tree) {
    rooted_tree t;
    t.local.assign(g.node_count(), -1);
    auto touch = [&](int v) {
        if (t.local[v] < 0) {
            t.local[v] = static_cast<int>(t.members.size());
            t.members.push_back(v);
        }
    };
    for (auto [a, b] : tree) {
        touch(a);
        touch(b);
    }
    const int n = static_cast<int>(t.members.size());
    t.adj.resize(n);
    for (auto [a, b] : tree) {
        t.adj[t.local[a]].push_back(t.local[b]);
        t.adj[t.local[b]].push_back(t.local[a]);
    }
    t.parent.assign(n, -1);
    t.order.reserve(n);
    std::vector<int> stack{0};
    std::vector<char> seen(n, 0);
    seen[0] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        t.order.push_back(v);
        for (int u : t.adj[v])
            if (!seen[u]) {
                seen[u] = 1;
                t.parent[u] = v;
                stack.push_back(u);
            }
    }
    return t;
}

} // namespace detail

// An edge of the tree whose removal splits it into two parts that both lie in
// [(1-eps) T, (1+eps) T], chosen uniformly among qualifying edges. Empty when
// no edge qualifies.
inline std::optional<std::pair<int, int>> balanced_cut(const dual_graph& g,
                                                       const std::vector<std::pair<int, int>>& tree,
                                                       double target, double epsilon, rng& r) {
    if (tree.empty()) return std::nullopt;
    auto t = detail::root_tree(g, tree);
    const int n = static_cast<int>(t.members.size());

    std::vector<long long> subtree(n, 0);
    long long total = 0;
    for (int v : t.members) total += g.nodes[v].population;
    for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
        subtree[*it] += g.nodes[t.members[*it]].population;
        if (t.parent[*it] >= 0) subtree[t.parent[*it]] += subtree[*it];
    }

    const double lo = (1.0 - epsilon) * target;
    const double hi = (1.0 + epsilon) * target;
    std::vector<std::pair<int, int>> qualifying;
    for (int v = 0; v < n; ++v) {
        if (t.parent[v] < 0) continue;
        const double a = static_cast<double>(subtree[v]);
        const double b = static_cast<double>(total - subtree[v]);
        if (a >= lo && a <= hi && b >= lo && b <= hi)
            qualifying.emplace_back(t.members[v], t.members[t.parent[v]]);
    }
    if (qualifying.empty()) return std::nullopt;
    return qualifying[r.below(qualifying.size())];
}

// Nodes on cut.first's side of the tree after removing the cut edge.
inline std::vector<int> tree_side(const std::vector<std::pair<int, int>>& tree,
                                  std::pair<int, int> cut, const dual_graph& g) {
    auto t = detail::root_tree(g, tree);
    std::vector<int> side;
    std::vector<int> stack{t.local[cut.first]};
    std::vector<char> seen(t.members.size(), 0);
    seen[t.local[cut.first]] = 1;
    const int blocked = t.local[cut.second];
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        side.push_back(t.members[v]);
        for (int u : t.adj[v])
            if (!seen[u] && u != blocked) {
                seen[u] = 1;
                stack.push_back(u);
            }
    }
    return side;
}

// Initial plan by recursive tree bipartition: split the region into floor/ceil
// halves of districts, drawing fresh trees until a cut puts both sides inside
// their aggregate balance bands, preferring the cut closest to proportional.
inline plan seed_plan(const dual_graph& g, int k, double epsilon, rng& r,
                      int tree_attempts = 1000, int restarts = 20) {
    const double ideal = static_cast<double>(g.total_population) / k;

    std::vector<int> assignment(g.node_count(), -1);

    std::function<void(const std::vector<int>&, int, int)> split =
        [&](const std::vector<int>& region, int parts, int base) {
            if (parts == 1) {
                for (int v : region) assignment[v] = base;
                return;
            }
            const int k1 = parts / 2;
            const int k2 = parts - k1;
            long long region_pop = 0;
            for (int v : region) region_pop += g.nodes[v].population;

            for (int attempt = 0; attempt < tree_attempts; ++attempt) {
                auto tree = random_spanning_tree(g, region, r);
                auto t = detail::root_tree(g, tree);
                const int n = static_cast<int>(t.members.size());
                std::vector<long long> subtree(n, 0);
                for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
                    subtree[*it] += g.nodes[t.members[*it]].population;
                    if (t.parent[*it] >= 0) subtree[t.parent[*it]] += subtree[*it];
                }

                int best_v = -1, best_k1_side = 0;
                double best_gap = 0.0;
                for (int v = 0; v < n; ++v) {
                    if (t.parent[v] < 0) continue;
                    const double a = static_cast<double>(subtree[v]);
                    const double b = static_cast<double>(region_pop) - a;
                    for (int orient = 0; orient < 2; ++orient) {
                        const double pa = orient ? b : a;
                        const double pb = orient ? a : b;
                        if (pa < (1.0 - epsilon) * k1 * ideal || pa > (1.0 + epsilon) * k1 * ideal)
                            continue;
                        if (pb < (1.0 - epsilon) * k2 * ideal || pb > (1.0 + epsilon) * k2 * ideal)
                            continue;
                        const double gap = std::fabs(pa - k1 * ideal);
                        if (best_v < 0 || gap < best_gap) {
                            best_v = v;
                            best_k1_side = orient ? 0 : 1; // 1: subtree side is the k1 part
                            best_gap = gap;
                        }
                    }
                }
                if (best_v < 0) continue;

                auto side = tree_side(tree, {t.members[best_v], t.members[t.parent[best_v]]}, g);
                std::vector<char> in_side(g.node_count(), 0);
                for (int v : side) in_side[v] = 1;
                std::vector<int> rest;
                for (int v : region)
                    if (!in_side[v]) rest.push_back(v);

                if (best_k1_side) {
                    split(side, k1, base);
                    split(rest, k2, base + k1);
                } else {
                    split(rest, k1, base);
                    split(side, k2, base + k1);
                }
                return;
            }
            throw error(errc::step_exhausted, "seed plan bipartition failed");
        };

    std::vector<int> all(g.node_count());
    std::iota(all.begin(), all.end(), 0);
    for (int restart = 0; restart < restarts; ++restart) {
        try {
            std::fill(assignment.begin(), assignment.end(), -1);
            split(all, k, 0);
            return validate_plan(g, assignment, k, epsilon);
        } catch (const error& e) {
            if (e.code != errc::step_exhausted && e.code != errc::population_imbalance &&
                e.code != errc::district_disconnected)
                throw;
        }
    }
    throw error(errc::step_exhausted, "seed plan generation exhausted its restarts");
}

} // namespace topoplan
