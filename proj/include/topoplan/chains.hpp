#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/rng.hpp"
#include "topoplan/spanning.hpp"

namespace topoplan {

struct chain_config {
    long steps = 1;
    long subsample_interval = 1;
    double epsilon = 0.02;
    uint64_t rng_seed = 0;
    int max_resplit_attempts = 100;   // fresh trees per chosen district pair
    int step_proposal_budget = 10000; // total tree draws before StepExhausted
};

inline void validate(const chain_config& cfg) {
    if (cfg.steps < 1) throw error(errc::invalid_config, "steps must be at least 1");
    if (cfg.subsample_interval < 1)
        throw error(errc::invalid_config, "subsample_interval must be at least 1");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw error(errc::invalid_config, "epsilon must lie in (0,1)");
    if (cfg.max_resplit_attempts < 1 || cfg.step_proposal_budget < 1)
        throw error(errc::invalid_config, "retry budgets must be positive");
}

struct bias_config {
    std::string favored_attr; // numerator of the favored party's share
    std::string other_attr;
    double safe_threshold = 0.53;
    double beta = 2.0;
};

inline void validate(const bias_config& bias) {
    if (!(bias.safe_threshold > 0.5 && bias.safe_threshold < 1.0))
        throw error(errc::invalid_config, "safe_threshold must lie in (0.5, 1)");
    if (!(bias.beta > 0.0)) throw error(errc::invalid_config, "beta must be positive");
}

struct ensemble {
    std::vector<plan> plans;
    std::string kind; // recom | flip | biased-recom
    uint64_t rng_seed = 0;
    long steps = 0;
    long proposals = 0;
    long accepted = 0;
    chain_config config;
};

namespace detail {

inline std::vector<std::pair<int, int>> district_pairs(const dual_graph& g, const plan& p) {
    std::set<std::pair<int, int>> cross;
    for (auto [u, v] : g.edges) {
        int a = p.assignment[u], b = p.assignment[v];
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        cross.emplace(a, b);
    }
    return {cross.begin(), cross.end()};
}

} // namespace detail

// One recombination step: pick an adjacent district pair uniformly, merge,
// draw a uniform spanning tree, re-split by a balanced cut. Failed cuts get
// fresh trees up to max_resplit_attempts, then a fresh pair, within the
// step's overall proposal budget.
inline plan recom_step(const dual_graph& g, const plan& p, rng& r, const chain_config& cfg) {
    const double target = static_cast<double>(g.total_population) / p.k;
    auto pairs = detail::district_pairs(g, p);
    if (pairs.empty()) throw error(errc::step_exhausted, "no adjacent district pairs");

    int budget = cfg.step_proposal_budget;
    while (budget > 0) {
        auto [di, dj] = pairs[r.below(pairs.size())];
        std::vector<int> merged;
        for (int v = 0; v < g.node_count(); ++v)
            if (p.assignment[v] == di || p.assignment[v] == dj) merged.push_back(v);

        for (int attempt = 0; attempt < cfg.max_resplit_attempts && budget > 0; ++attempt) {
            --budget;
            auto tree = random_spanning_tree(g, merged, r);
            auto cut = balanced_cut(g, tree, target, cfg.epsilon, r);
            if (!cut) continue;

            auto side = tree_side(tree, *cut, g);
            std::vector<char> in_side(g.node_count(), 0);
            for (int v : side) in_side[v] = 1;

            // Keep labels sticky: each part takes the old index it overlaps more.
            long long side_from_i = 0, side_from_j = 0, rest_from_i = 0, rest_from_j = 0;
            for (int v : merged) {
                long long pop = g.nodes[v].population;
                if (in_side[v])
                    (p.assignment[v] == di ? side_from_i : side_from_j) += pop;
                else
                    (p.assignment[v] == di ? rest_from_i : rest_from_j) += pop;
            }
            const bool side_is_i = side_from_i + rest_from_j >= side_from_j + rest_from_i;

            plan next = p;
            next.epsilon = cfg.epsilon;
            for (int v : merged)
                next.assignment[v] = in_side[v] == side_is_i ? di : dj;
            return next;
        }
    }
    throw error(errc::step_exhausted, "recom step exhausted its proposal budget");
}

namespace detail {

// Moving v out of its district must keep the district nonempty, connected and
// inside the balance band; the receiving district only grows, so just its
// upper bound is checked.
inline bool flip_is_valid(const dual_graph& g, const plan& p,
                          const std::vector<long long>& district_pop,
                          const std::vector<int>& district_size, int v, int dst) {
    const int src = p.assignment[v];
    if (district_size[src] <= 1) return false;
    const long long moved = g.nodes[v].population;
    const double lo = (1.0 - p.epsilon) * p.ideal_size;
    const double hi = (1.0 + p.epsilon) * p.ideal_size;
    if (static_cast<double>(district_pop[src] - moved) < lo) return false;
    if (static_cast<double>(district_pop[dst] + moved) > hi) return false;

    int anchor = -1;
    for (int u = 0; u < g.node_count(); ++u)
        if (u != v && p.assignment[u] == src) {
            anchor = u;
            break;
        }
    std::vector<int> stack{anchor};
    std::vector<char> seen(g.node_count(), 0);
    seen[anchor] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int u : g.adjacency[x])
            if (!seen[u] && u != v && p.assignment[u] == src) {
                seen[u] = 1;
                ++reached;
                stack.push_back(u);
            }
    }
    return reached == district_size[src] - 1;
}

} // namespace detail

// One flip step: a proposal is a (boundary unit, neighboring district) pair
// drawn uniformly; invalid proposals are rejected and redrawn, which leaves
// the accepted move uniform over the valid pairs.
inline plan flip_step(const dual_graph& g, const plan& p, rng& r) {
    std::vector<std::pair<int, int>> candidates;
    for (int v = 0; v < g.node_count(); ++v) {
        std::set<int> neighbor_districts;
        for (int u : g.adjacency[v])
            if (p.assignment[u] != p.assignment[v]) neighbor_districts.insert(p.assignment[u]);
        for (int d : neighbor_districts) candidates.emplace_back(v, d);
    }
    if (candidates.empty()) throw error(errc::no_valid_flip, "plan has no boundary units");

    std::vector<long long> district_pop(p.k, 0);
    std::vector<int> district_size(p.k, 0);
    for (int v = 0; v < g.node_count(); ++v) {
        district_pop[p.assignment[v]] += g.nodes[v].population;
        ++district_size[p.assignment[v]];
    }

    auto apply = [&](std::pair<int, int> move) {
        plan next = p;
        next.assignment[move.first] = move.second;
        return next;
    };

    const long attempts = 4 * static_cast<long>(candidates.size());
    for (long t = 0; t < attempts; ++t) {
        auto move = candidates[r.below(candidates.size())];
        if (detail::flip_is_valid(g, p, district_pop, district_size, move.first, move.second))
            return apply(move);
    }
    std::vector<std::pair<int, int>> valid;
    for (auto move : candidates)
        if (detail::flip_is_valid(g, p, district_pop, district_size, move.first, move.second))
            valid.push_back(move);
    if (valid.empty()) throw error(errc::no_valid_flip, "every boundary flip is invalid");
    return apply(valid[r.below(valid.size())]);
}

enum class chain_kind { recom, flip };

// Runs a chain for cfg.steps steps, keeping every subsample_interval-th
// state. Deterministic given cfg.rng_seed.
inline ensemble run_chain(const dual_graph& g, const plan& initial, const chain_config& cfg,
                          chain_kind kind) {
    validate(cfg);
    plan state = validate_plan(g, initial.assignment, initial.k, cfg.epsilon);

    ensemble e;
    e.kind = kind == chain_kind::recom ? "recom" : "flip";
    e.rng_seed = cfg.rng_seed;
    e.config = cfg;
    e.plans.reserve(cfg.steps / cfg.subsample_interval);

    rng r(cfg.rng_seed);
    for (long s = 1; s <= cfg.steps; ++s) {
        state = kind == chain_kind::recom ? recom_step(g, state, r, cfg) : flip_step(g, state, r);
        ++e.steps;
        ++e.proposals;
        ++e.accepted;
        if (s % cfg.subsample_interval == 0) e.plans.push_back(state);
    }
    return e;
}

// Districts where the favored party's two-party share strictly exceeds the
// threshold.
inline int safe_seats(const district_graph& dg, const std::string& favored_attr,
                      const std::string& other_attr, double threshold) {
    auto fav_it = dg.attribute_totals.find(favored_attr);
    auto oth_it = dg.attribute_totals.find(other_attr);
    if (fav_it == dg.attribute_totals.end() || oth_it == dg.attribute_totals.end())
        throw error(errc::invalid_config, "vote attributes missing for safe seat count");
    int seats = 0;
    for (int d = 0; d < dg.k; ++d) {
        const double f = fav_it->second[d], o = oth_it->second[d];
        if (f + o <= 0)
            throw error(errc::zero_turnout_district,
                        "district " + std::to_string(d) + " has zero two-party turnout", d);
        if (f / (f + o) > threshold) ++seats;
    }
    return seats;
}

// Metropolis rule for safe-seat losses: accept freely unless the count drops,
// otherwise with probability e^(-beta * delta).
inline bool metropolis_accept(long delta_s, double beta, rng& r) {
    if (delta_s <= 0) return true;
    return r.bernoulli(std::exp(-beta * static_cast<double>(delta_s)));
}

// ReCom chain weighted toward safe seats for the favored party. Rejected
// proposals leave the state unchanged and still count as a step.
inline ensemble biased_chain(const dual_graph& g, const plan& initial, const chain_config& cfg,
                             const bias_config& bias) {
    validate(cfg);
    validate(bias);
    plan state = validate_plan(g, initial.assignment, initial.k, cfg.epsilon);

    ensemble e;
    e.kind = "biased-recom";
    e.rng_seed = cfg.rng_seed;
    e.config = cfg;
    e.plans.reserve(cfg.steps / cfg.subsample_interval);

    rng r(cfg.rng_seed);
    district_graph dg = build_district_graph(g, state);
    int safe = safe_seats(dg, bias.favored_attr, bias.other_attr, bias.safe_threshold);

    for (long s = 1; s <= cfg.steps; ++s) {
        plan proposal = recom_step(g, state, r, cfg);
        district_graph proposal_dg = build_district_graph(g, proposal);
        int proposal_safe =
            safe_seats(proposal_dg, bias.favored_attr, bias.other_attr, bias.safe_threshold);
        ++e.proposals;
        ++e.steps;
        if (metropolis_accept(safe - proposal_safe, bias.beta, r)) {
            state = std::move(proposal);
            safe = proposal_safe;
            ++e.accepted;
        }
        if (s % cfg.subsample_interval == 0) e.plans.push_back(state);
    }
    return e;
}

} // namespace topoplan
