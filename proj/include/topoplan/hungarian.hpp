#pragma once

#include <limits>
#include <vector>

namespace topoplan {

// Square minimum-cost assignment by shortest augmenting paths (Kuhn-Munkres
// with potentials), O(n^3). Returns row -> column; total cost in *total.
inline std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost,
                                         double* total = nullptr) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = match[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    double sum = 0.0;
    for (int j = 1; j <= n; ++j)
        if (match[j]) {
            row_to_col[match[j] - 1] = j - 1;
            sum += cost[match[j] - 1][j - 1];
        }
    if (total) *total = sum;
    return row_to_col;
}

// Maximum bipartite matching (Kuhn's augmenting paths) over a boolean
// adjacency; used for bottleneck feasibility tests.
class bipartite_matcher {
public:
    bipartite_matcher(int left, int right) : adj_(left), match_right_(right, -1) {}

    void add_edge(int l, int r) { adj_[l].push_back(r); }

    int solve() {
        int matched = 0;
        for (int l = 0; l < static_cast<int>(adj_.size()); ++l) {
            std::vector<char> visited(match_right_.size(), 0);
            if (try_augment(l, visited)) ++matched;
        }
        return matched;
    }

    const std::vector<int>& right_match() const { return match_right_; }

private:
    bool try_augment(int l, std::vector<char>& visited) {
        for (int r : adj_[l]) {
            if (visited[r]) continue;
            visited[r] = 1;
            if (match_right_[r] < 0 || try_augment(match_right_[r], visited)) {
                match_right_[r] = l;
                return true;
            }
        }
        return false;
    }

    std::vector<std::vector<int>> adj_;
    std::vector<int> match_right_;
};

} // namespace topoplan
