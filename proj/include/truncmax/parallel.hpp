#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <utility>
#include <vector>

namespace truncmax {

/// Worker cap: explicit argument, else TRUNCMAX_THREADS, else hardware count.
inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TRUNCMAX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static split of [begin, end) into per-worker chunks. Workers own disjoint
// index ranges and write disjoint outputs, so results do not depend on the
// worker count.
template <typename Body>
void parallel_for(std::int64_t begin, std::int64_t end, int threads, Body&& body) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;

    int workers = resolve_thread_count(threads);
    if (workers > total) workers = static_cast<int>(total);
    if (workers <= 1) {
        body(begin, end);
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = begin + total * w / workers;
        const std::int64_t hi = begin + total * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace truncmax
