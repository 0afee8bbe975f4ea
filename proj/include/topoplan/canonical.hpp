#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "topoplan/error.hpp"
#include "topoplan/graph.hpp"

namespace topoplan {
namespace detail {

// Exact canonical labeling for graphs on up to 64 vertices by equitable
// refinement plus individualization, taking the lexicographically least
// adjacency bitstring over all leaves of the search tree. The canonical
// string lists the upper triangle column-by-column so that fixing the first
// L vertices fixes a contiguous prefix, which makes prefix pruning cheap.
class canonical_search {
public:
    canonical_search(const std::vector<uint64_t>& adj, long budget)
        : adj_(adj), k_(static_cast<int>(adj.size())), budget_(budget) {}

    std::string run() {
        std::vector<std::vector<int>> cells(1);
        cells[0].resize(k_);
        for (int i = 0; i < k_; ++i) cells[0][i] = i;
        search(std::move(cells));
        return best_;
    }

private:
    static uint64_t mask_of(const std::vector<int>& cell) {
        uint64_t m = 0;
        for (int v : cell) m |= uint64_t(1) << v;
        return m;
    }

    // Splits cells by neighbor counts into each splitter until stable.
    void refine(std::vector<std::vector<int>>& cells) const {
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t s = 0; s < cells.size() && !changed; ++s) {
                const uint64_t splitter = mask_of(cells[s]);
                std::vector<std::vector<int>> next;
                next.reserve(cells.size());
                for (auto& cell : cells) {
                    if (cell.size() == 1) {
                        next.push_back(std::move(cell));
                        continue;
                    }
                    std::map<int, std::vector<int>> groups;
                    for (int v : cell) groups[std::popcount(adj_[v] & splitter)].push_back(v);
                    if (groups.size() == 1) {
                        next.push_back(std::move(cell));
                    } else {
                        changed = true;
                        for (auto& [count, group] : groups) next.push_back(std::move(group));
                    }
                }
                cells = std::move(next);
            }
        }
    }

    // Bits among the first `prefix` labeled vertices, column-major.
    std::string partial_string(const std::vector<int>& label, int prefix) const {
        std::string s;
        s.reserve(prefix * (prefix - 1) / 2);
        for (int j = 1; j < prefix; ++j)
            for (int i = 0; i < j; ++i)
                s.push_back((adj_[label[i]] >> label[j]) & 1 ? '1' : '0');
        return s;
    }

    void search(std::vector<std::vector<int>> cells) {
        if (++nodes_ > budget_)
            throw error(errc::too_large, "canonical labeling search budget exceeded");
        refine(cells);

        std::vector<int> label;
        label.reserve(k_);
        size_t cursor = 0;
        while (cursor < cells.size() && cells[cursor].size() == 1)
            label.push_back(cells[cursor++][0]);

        if (!best_.empty()) {
            std::string partial = partial_string(label, static_cast<int>(label.size()));
            if (partial.compare(best_.substr(0, partial.size())) > 0) return;
        }
        if (static_cast<int>(label.size()) == k_) {
            std::string leaf = partial_string(label, k_);
            if (best_.empty() || leaf < best_) best_ = std::move(leaf);
            return;
        }

        // First smallest non-singleton cell is the branching target.
        size_t target = cursor;
        for (size_t c = cursor; c < cells.size(); ++c)
            if (cells[c].size() > 1 && cells[c].size() < cells[target].size()) target = c;

        for (int v : cells[target]) {
            std::vector<std::vector<int>> child;
            child.reserve(cells.size() + 1);
            for (size_t c = 0; c < cells.size(); ++c) {
                if (c != target) {
                    child.push_back(cells[c]);
                    continue;
                }
                child.push_back({v});
                std::vector<int> rest;
                for (int u : cells[c])
                    if (u != v) rest.push_back(u);
                child.push_back(std::move(rest));
            }
            search(std::move(child));
        }
    }

    const std::vector<uint64_t>& adj_;
    int k_;
    long budget_;
    long nodes_ = 0;
    std::string best_;
};

} // namespace detail

// Canonical key over adjacency masks; equal keys iff isomorphic.
inline std::string canonical_key(const std::vector<uint64_t>& adj, long budget = 2000000) {
    detail::canonical_search s(adj, budget);
    return std::to_string(adj.size()) + ":" + s.run();
}

// Canonical isomorphism-class key of a district graph for k up to `limit`
// (hard cap 64, the width of the adjacency masks).
inline std::string canonical_class(const district_graph& dg, int limit = 64) {
    if (dg.k > limit || dg.k > 64)
        throw error(errc::too_large,
                    "canonical labeling limited to " + std::to_string(std::min(limit, 64)) +
                        " districts, got " + std::to_string(dg.k));
    std::vector<uint64_t> adj(dg.k, 0);
    for (auto [u, v] : dg.edges) {
        adj[u] |= uint64_t(1) << v;
        adj[v] |= uint64_t(1) << u;
    }
    return canonical_key(adj);
}

// Batch-statistics variant: graphs beyond the cap report "unclassified"
// instead of failing the whole run.
inline std::string canonical_class_or_unclassified(const district_graph& dg, int limit = 64) {
    try {
        return canonical_class(dg, limit);
    } catch (const error& e) {
        if (e.code == errc::too_large) return "unclassified";
        throw;
    }
}

} // namespace topoplan
