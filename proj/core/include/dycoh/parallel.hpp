#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dycoh {

// Thread count resolution: explicit value > DYCOH_THREADS env > hardware.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DYCOH_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static-partition parallel loop over [0, n). Each worker gets one contiguous
// range, so writes to per-index output slots are disjoint and results do not
// depend on the thread count.
inline void parallel_for(int64_t n, int threads,
                         const std::function<void(int64_t, int64_t, int)>& body) {
    threads = static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(threads, n > 0 ? n : 1)));
    if (threads == 1 || n <= 1) {
        body(0, n, 0);
        return;
    }
    const int64_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        const int64_t begin = static_cast<int64_t>(t) * chunk;
        const int64_t end = std::min<int64_t>(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end, t] { body(begin, end, t); });
    }
    for (auto& th : pool) th.join();
}

} // namespace dycoh
