#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topoplan/chains.hpp"
#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/hungarian.hpp"
#include "topoplan/metrics.hpp"
#include "topoplan/persistence.hpp"

namespace topoplan {

enum class perturbation_kind { one_way, general, not_a_perturbation };

// How two plans differ, after re-indexing the second plan's districts to
// maximize shared population with the first. A one-way perturbation moves
// the units `moved_ij` from district_i to district_j; a general one also
// moves `moved_ji` back the other way.
struct perturbation_class {
    perturbation_kind kind = perturbation_kind::not_a_perturbation;
    int district_i = -1, district_j = -1;
    std::vector<int> moved_ij, moved_ji;
    bool graph_preserving = false;
    std::vector<int> relabel; // district of plan B -> matching district of plan A
};

inline perturbation_class classify_perturbation(const dual_graph& g, const plan& a,
                                                const plan& b) {
    if (a.k != b.k) throw error(errc::invalid_config, "plans must have the same k");
    const int k = a.k;

    // Best district correspondence by shared population; the tiny per-unit
    // term breaks ties when populations are zero.
    std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
    for (int v = 0; v < g.node_count(); ++v)
        cost[b.assignment[v]][a.assignment[v]] -= static_cast<double>(g.nodes[v].population) + 1e-9;
    perturbation_class out;
    out.relabel = solve_assignment(cost);

    std::vector<int> b_relabeled(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) b_relabeled[v] = out.relabel[b.assignment[v]];

    std::set<int> touched;
    for (int v = 0; v < g.node_count(); ++v)
        if (a.assignment[v] != b_relabeled[v]) {
            touched.insert(a.assignment[v]);
            touched.insert(b_relabeled[v]);
        }

    // Graph preservation under the labeled correspondence.
    plan b_as_a = b;
    b_as_a.assignment = b_relabeled;
    out.graph_preserving =
        build_district_graph(g, a).edges == build_district_graph(g, b_as_a).edges;

    if (touched.empty()) {
        out.kind = perturbation_kind::one_way; // degenerate: identical plans
        return out;
    }
    if (touched.size() != 2) {
        out.kind = perturbation_kind::not_a_perturbation;
        return out;
    }

    auto it = touched.begin();
    int i = *it++, j = *it;
    std::vector<int> ij, ji;
    for (int v = 0; v < g.node_count(); ++v) {
        if (a.assignment[v] == i && b_relabeled[v] == j) ij.push_back(v);
        if (a.assignment[v] == j && b_relabeled[v] == i) ji.push_back(v);
    }
    if (!ij.empty() && !ji.empty()) {
        out.kind = perturbation_kind::general;
        out.district_i = i;
        out.district_j = j;
        out.moved_ij = std::move(ij);
        out.moved_ji = std::move(ji);
    } else {
        out.kind = perturbation_kind::one_way;
        // Orient so units move from district_i to district_j.
        if (ij.empty()) {
            out.district_i = j;
            out.district_j = i;
            out.moved_ij = std::move(ji);
        } else {
            out.district_i = i;
            out.district_j = j;
            out.moved_ij = std::move(ij);
        }
    }
    return out;
}

struct bound_report {
    double theoretical_bound = 0.0;
    double observed_bottleneck = 0.0;
    double alpha = 0.0;
    double epsilon = 0.0;
    bool satisfied = false;
};

inline constexpr double bound_slack = 1e-12;

// d_inf(D_f, D_g) <= ||f - g||_inf for two filtrations of the same graph.
inline bound_report vote_stability_check(const district_graph& dg, const std::vector<double>& f,
                                         const std::vector<double>& g) {
    bound_report rep;
    for (int d = 0; d < dg.k; ++d)
        rep.theoretical_bound = std::max(rep.theoretical_bound, std::fabs(f[d] - g[d]));
    rep.observed_bottleneck =
        bottleneck(diagram_of(dg.k, dg.edges, f), diagram_of(dg.k, dg.edges, g)).cost;
    rep.satisfied = rep.observed_bottleneck <= rep.theoretical_bound + bound_slack;
    return rep;
}

// Bound for a graph-preserving one-way perturbation:
// d_inf <= 2 eps / (alpha (1-eps)) * max(|f(V_ij)-f(P_i)|, |f(V_ij)-f(P_j)|),
// with alpha the turnout lower bound over the four affected district sets.
inline bound_report geo_stability_bound(const dual_graph& g, const plan& a, const plan& b,
                                        const std::string& rep_attr, const std::string& dem_attr,
                                        std::optional<double> alpha_override = std::nullopt) {
    auto cls = classify_perturbation(g, a, b);
    if (cls.kind != perturbation_kind::one_way)
        throw error(errc::not_one_way, "plans are not a one-way perturbation of each other");
    if (!cls.graph_preserving)
        throw error(errc::not_graph_preserving, "perturbation changes the district dual graph");

    bound_report rep;
    rep.epsilon = a.epsilon;

    district_graph dg_a = build_district_graph(g, a);
    district_graph dg_b = build_district_graph(g, b);
    republican_share(dg_a, rep_attr, dem_attr);
    republican_share(dg_b, rep_attr, dem_attr);
    rep.observed_bottleneck =
        bottleneck(persistence_diagram(dg_a), persistence_diagram(dg_b)).cost;

    if (cls.moved_ij.empty()) { // identical plans
        rep.alpha = alpha_override.value_or(0.0);
        rep.theoretical_bound = 0.0;
        rep.satisfied = rep.observed_bottleneck <= bound_slack;
        return rep;
    }

    auto votes_of = [&](const std::vector<int>& units) {
        double r = 0, d = 0;
        long long pop = 0;
        for (int v : units) {
            auto ri = g.nodes[v].attributes.find(rep_attr);
            auto di = g.nodes[v].attributes.find(dem_attr);
            if (ri != g.nodes[v].attributes.end()) r += ri->second;
            if (di != g.nodes[v].attributes.end()) d += di->second;
            pop += g.nodes[v].population;
        }
        struct totals {
            double rep, dem;
            long long pop;
        };
        return totals{r, d, pop};
    };
    auto district_units = [&](const plan& p, int d) {
        std::vector<int> units;
        for (int v = 0; v < g.node_count(); ++v)
            if (p.assignment[v] == d) units.push_back(v);
        return units;
    };

    plan b_as_a = b;
    for (int v = 0; v < g.node_count(); ++v) b_as_a.assignment[v] = cls.relabel[b.assignment[v]];

    const auto vi = votes_of(district_units(a, cls.district_i));
    const auto vj = votes_of(district_units(a, cls.district_j));
    const auto vi2 = votes_of(district_units(b_as_a, cls.district_i));
    const auto vj2 = votes_of(district_units(b_as_a, cls.district_j));
    const auto moved = votes_of(cls.moved_ij);

    if (alpha_override) {
        rep.alpha = *alpha_override;
    } else {
        rep.alpha = 1.0;
        for (const auto& w : {vi, vj, vi2, vj2})
            rep.alpha = std::min(rep.alpha, (w.rep + w.dem) / static_cast<double>(w.pop));
    }

    auto share = [](double r, double d) { return r / (r + d); };
    const double f_moved = share(moved.rep, moved.dem);
    const double drift = std::max(std::fabs(f_moved - share(vi.rep, vi.dem)),
                                  std::fabs(f_moved - share(vj.rep, vj.dem)));
    rep.theoretical_bound =
        2.0 * rep.epsilon / (rep.alpha * (1.0 - rep.epsilon)) * drift;
    rep.satisfied = rep.observed_bottleneck <= rep.theoretical_bound + bound_slack;
    return rep;
}

// Bottleneck distance to the starting plan after each of n_steps flip moves.
inline std::vector<double> flip_trace(const dual_graph& g, const plan& start,
                                      const std::string& rep_attr, const std::string& dem_attr,
                                      long n_steps, uint64_t seed) {
    district_graph dg0 = build_district_graph(g, start);
    republican_share(dg0, rep_attr, dem_attr);
    const diagram base = persistence_diagram(dg0);

    std::vector<double> trace;
    trace.reserve(n_steps);
    rng r(seed);
    plan state = start;
    for (long s = 0; s < n_steps; ++s) {
        state = flip_step(g, state, r);
        district_graph dg = build_district_graph(g, state);
        republican_share(dg, rep_attr, dem_attr);
        trace.push_back(bottleneck(base, persistence_diagram(dg)).cost);
    }
    return trace;
}

struct preservation_result {
    long preserved = 0;
    long steps = 0;

    std::optional<double> rate() const {
        if (steps == 0) return std::nullopt;
        return static_cast<double>(preserved) / static_cast<double>(steps);
    }
};

// Fraction of ReCom steps whose before/after plans induce isomorphic labeled
// district dual graphs.
inline preservation_result recom_preservation_rate(const dual_graph& g, const plan& start,
                                                   long n_steps, const chain_config& cfg) {
    preservation_result out;
    rng r(cfg.rng_seed);
    plan state = validate_plan(g, start.assignment, start.k, cfg.epsilon);
    for (long s = 0; s < n_steps; ++s) {
        plan next = recom_step(g, state, r, cfg);
        auto cls = classify_perturbation(g, state, next);
        out.preserved += cls.graph_preserving ? 1 : 0;
        ++out.steps;
        state = std::move(next);
    }
    return out;
}

} // namespace topoplan
