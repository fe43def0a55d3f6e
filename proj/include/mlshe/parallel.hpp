#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace mlshe {

inline int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..n-1) on `workers` threads. Work items must be independent;
// callers that reduce results should collect them per index and fold in
// index order so the outcome does not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = 0) {
    if (workers <= 0) workers = default_workers();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::vector<std::thread> pool;
    const int used = static_cast<int>(std::min<std::size_t>(workers, n));
    pool.reserve(used);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                if (stop.load(std::memory_order_relaxed)) return;
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    stop.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace mlshe
