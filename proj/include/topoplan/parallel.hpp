#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace topoplan {

// Runs fn(0..n-1) across `threads` workers. Callers write results into
// preassigned slots so the output does not depend on scheduling.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<long>(threads, n);
    pool.reserve(count);
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace topoplan
