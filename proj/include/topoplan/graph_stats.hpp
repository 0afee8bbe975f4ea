#pragma once

#include <map>
#include <queue>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"

namespace topoplan {

struct graph_stats {
    int diameter = 0;
    int max_degree = 0;
    double mean_degree = 0.0;
    double density = 0.0; // |E| / C(k,2)
};

struct real_histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<long> counts;
};

struct stats_summary {
    std::vector<graph_stats> per_graph;
    std::map<int, long> diameter_hist;
    std::map<int, long> max_degree_hist;
    real_histogram mean_degree_hist;
    real_histogram density_hist;
};

inline graph_stats statistics_of(const district_graph& dg) {
    graph_stats s;
    for (int v = 0; v < dg.k; ++v)
        s.max_degree = std::max(s.max_degree, static_cast<int>(dg.adjacency[v].size()));
    s.mean_degree = dg.k > 0 ? 2.0 * static_cast<double>(dg.edges.size()) / dg.k : 0.0;
    s.density = dg.k > 1 ? static_cast<double>(dg.edges.size()) /
                               (static_cast<double>(dg.k) * (dg.k - 1) / 2.0)
                         : 0.0;
    // Diameter via BFS from every vertex.
    for (int src = 0; src < dg.k; ++src) {
        std::vector<int> dist(dg.k, -1);
        std::queue<int> q;
        dist[src] = 0;
        q.push(src);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int u : dg.adjacency[v])
                if (dist[u] < 0) {
                    dist[u] = dist[v] + 1;
                    q.push(u);
                }
        }
        for (int d : dist) s.diameter = std::max(s.diameter, d);
    }
    return s;
}

namespace detail {

inline real_histogram bin_values(const std::vector<double>& values, int bins = 20) {
    real_histogram h;
    if (values.empty()) return h;
    h.lo = *std::min_element(values.begin(), values.end());
    h.hi = *std::max_element(values.begin(), values.end());
    h.counts.assign(bins, 0);
    double width = (h.hi - h.lo) / bins;
    for (double v : values) {
        int b = width > 0 ? std::min(bins - 1, static_cast<int>((v - h.lo) / width)) : 0;
        ++h.counts[b];
    }
    return h;
}

} // namespace detail

inline stats_summary graph_statistics(const std::vector<district_graph>& dgs) {
    if (dgs.empty()) throw error(errc::invalid_config, "graph_statistics needs at least one graph");
    stats_summary summary;
    std::vector<double> mean_degrees, densities;
    for (const auto& dg : dgs) {
        graph_stats s = statistics_of(dg);
        ++summary.diameter_hist[s.diameter];
        ++summary.max_degree_hist[s.max_degree];
        mean_degrees.push_back(s.mean_degree);
        densities.push_back(s.density);
        summary.per_graph.push_back(s);
    }
    summary.mean_degree_hist = detail::bin_values(mean_degrees);
    summary.density_hist = detail::bin_values(densities);
    return summary;
}

} // namespace topoplan
