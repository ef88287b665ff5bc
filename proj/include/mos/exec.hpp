#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

// Execution helpers. Maps over cells may run on several worker threads, but
// every reduction uses a fixed pairwise tree so results are bit-identical for
// any thread count.

namespace mos::exec {

inline std::atomic<int>& thread_slot() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_threads(int n) { thread_slot().store(n < 1 ? 1 : n); }

inline int threads() { return thread_slot().load(); }

/// Runs fn(i) for i in [0, n). fn must only write to per-index slots.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    const int nt = threads();
    if (nt <= 1 || n < 512) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Pairwise tree sum with a thread-count-independent association order.
inline double tree_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t mid = v.size() / 2;
    return tree_sum(v.subspan(0, mid)) + tree_sum(v.subspan(mid));
}

}  // namespace mos::exec
