#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fbsde {

namespace detail {
inline std::atomic<int>& max_threads_slot() {
    static std::atomic<int> value{0}; // 0 = hardware concurrency
    return value;
}
} // namespace detail

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

inline void set_max_threads(int n) { detail::max_threads_slot().store(n < 0 ? 0 : n); }

inline int max_threads() {
    const int n = detail::max_threads_slot().load();
    return n == 0 ? hardware_threads() : n;
}

// Runs fn(i) for i in [0, n). Results are independent of the worker count as
// long as fn(i) only writes state owned by index i. Exceptions thrown by fn
// are rethrown in the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>({static_cast<std::size_t>(max_threads()), n, 64});
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t block = std::max<std::size_t>(1, n / (8 * workers));
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t begin = cursor.fetch_add(block);
            if (begin >= n || failed.load(std::memory_order_relaxed)) return;
            const std::size_t end = std::min(n, begin + block);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace fbsde
