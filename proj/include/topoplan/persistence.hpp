#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"
#include "topoplan/union_find.hpp"

namespace topoplan {

// One feature: a connected component of the sublevel filtration, born at the
// share of its anchor district (a local minimum) and dying when it merges
// into an older component. The single surviving component has death = +inf.
struct diagram_point {
    double birth = 0.0;
    double death = 0.0;
    int anchor = -1;

    double persistence() const { return death - birth; }
    bool infinite() const { return std::isinf(death); }
};

struct diagram {
    std::vector<diagram_point> points; // sorted by birth
    int k = 0;
    bool tie_broken = false;
};

inline constexpr double death_infinity = std::numeric_limits<double>::infinity();

struct filtration_order_result {
    std::vector<int> order; // district indices, values ascending
    bool tie_broken = false;
};

// Districts sorted by filtration value; exact ties broken by district index
// and flagged (the share function is assumed injective, so this is a
// deterministic fallback rather than expected behavior).
inline filtration_order_result filtration_order(const std::vector<double>& values) {
    filtration_order_result r;
    r.order.resize(values.size());
    std::iota(r.order.begin(), r.order.end(), 0);
    for (size_t i = 0; i < values.size(); ++i)
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw error(errc::range_error,
                        "filtration value " + std::to_string(values[i]) + " outside [0,1]",
                        static_cast<long>(i));
    std::sort(r.order.begin(), r.order.end(), [&](int a, int b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    for (size_t p = 1; p < r.order.size(); ++p)
        if (values[r.order[p]] == values[r.order[p - 1]]) r.tie_broken = true;
    return r;
}

inline filtration_order_result filtration_order(const district_graph& dg) {
    if (static_cast<int>(dg.filtration.size()) != dg.k)
        throw error(errc::missing_filtration, "filtration not set on district graph");
    return filtration_order(dg.filtration);
}

// Degree-0 persistence of a vertex-filtered connected graph. Vertices enter
// in filtration order, every edge as soon as both endpoints are present;
// merges follow the elder rule (the younger component dies at the current
// value). Diagonal events (a vertex joining an existing component at its own
// insertion) are trivial and not emitted.
inline diagram diagram_of(int k, const std::vector<std::pair<int, int>>& edges,
                          const std::vector<double>& values) {
    if (k < 1) throw error(errc::disconnected, "empty filtered graph");
    if (static_cast<int>(values.size()) != k)
        throw error(errc::missing_filtration, "filtration size does not match vertex count");
    auto order = filtration_order(values);

    std::vector<std::vector<int>> adj(k);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }

    std::vector<int> position(k, -1);
    for (int p = 0; p < k; ++p) position[order.order[p]] = p;

    union_find components(k);
    std::vector<int> birth_pos(k); // root vertex -> position of its oldest member
    diagram d;
    d.k = k;
    d.tie_broken = order.tie_broken;

    for (int p = 0; p < k; ++p) {
        const int v = order.order[p];
        birth_pos[v] = p;
        for (int u : adj[v]) {
            if (position[u] > p) continue; // not inserted yet
            int ru = components.find(u);
            int rv = components.find(v);
            if (ru == rv) continue;
            int winner = birth_pos[ru] < birth_pos[rv] ? ru : rv;
            int loser = winner == ru ? rv : ru;
            if (birth_pos[loser] < p) {
                const int anchor = order.order[birth_pos[loser]];
                d.points.push_back({values[anchor], values[v], anchor});
            }
            components.absorb(winner, loser);
        }
    }

    const int root = components.find(order.order[0]);
    for (int v = 0; v < k; ++v)
        if (components.find(v) != root)
            throw error(errc::disconnected, "filtered graph is not connected");
    const int anchor = order.order[birth_pos[root]];
    d.points.push_back({values[anchor], death_infinity, anchor});

    std::sort(d.points.begin(), d.points.end(),
              [](const diagram_point& a, const diagram_point& b) { return a.birth < b.birth; });
    return d;
}

inline diagram persistence_diagram(const district_graph& dg) {
    if (static_cast<int>(dg.filtration.size()) != dg.k)
        throw error(errc::missing_filtration, "filtration not set on district graph");
    return diagram_of(dg.k, dg.edges, dg.filtration);
}

// Points with b < .5 and d > .5: features anchored by a Democratic-won
// district and separated from other such clusters by Republican-won ones.
inline diagram nw_quadrant(const diagram& d) {
    diagram out;
    out.k = d.k;
    out.tie_broken = d.tie_broken;
    for (const auto& pt : d.points)
        if (pt.birth < 0.5 && pt.death > 0.5) out.points.push_back(pt);
    return out;
}

} // namespace topoplan
