#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace bmp {

/// Thread count from an explicit request, else BMPSIM_THREADS, else the
/// hardware concurrency (at least 1).
unsigned resolve_thread_count(std::optional<unsigned> requested = std::nullopt);

/// Calls fn(i) for i in [0, n) on a small worker pool and returns the results
/// in index order. Work is handed out dynamically, but since each result is
/// stored at its own index, any later reduction over the vector is
/// independent of the thread count. The first exception thrown by a worker is
/// rethrown after all workers stop.
template <typename Fn>
auto map_indexed(std::size_t n, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? 1 : threads, n == 0 ? 1 : n));
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(pool);
        for (unsigned k = 0; k < pool; ++k) workers.emplace_back(worker);
        for (auto& w : workers) w.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace bmp
