#pragma once

#include <numeric>
#include <vector>

namespace topoplan {

// Union-find over dense ints with path compression. The merge direction is
// chosen by the caller (the persistence computation needs the elder root to
// win), so there is no union-by-rank.
class union_find {
public:
    explicit union_find(int n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        int root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            int next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    // Attach the tree rooted at `loser` under `winner`. Both must be roots.
    void absorb(int winner, int loser) { parent_[loser] = winner; }

private:
    std::vector<int> parent_;
};

} // namespace topoplan
