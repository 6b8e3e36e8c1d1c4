// parallel.hpp - bounded fork/join over index ranges
#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gklab {

// Thread budget: GKLAB_THREADS if set to a positive integer, else the hardware count.
inline int thread_budget() {
    static const int budget = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("GKLAB_THREADS")) {
            try {
                int v = std::stoi(env);
                if (v > 0) return std::min(v, 256);
            } catch (...) {
            }
        }
        return hw;
    }();
    return budget;
}

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks so results
// written per index do not depend on the thread count. The first exception
// thrown by any worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(int n, Fn&& fn, int min_block = 64) {
    const int threads = std::min(thread_budget(), std::max(1, n / std::max(1, min_block)));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first;
    std::mutex mu;
    for (int w = 0; w < threads; ++w) {
        const int lo = static_cast<int>(static_cast<long long>(n) * w / threads);
        const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / threads);
        pool.emplace_back([lo, hi, &fn, &first, &mu] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace gklab
