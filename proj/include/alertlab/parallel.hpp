#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace alertlab {

inline std::size_t default_threads() { return std::max<std::size_t>(1, std::thread::hardware_concurrency()); }

// Calls fn(i) for every i in [0, count) on up to `threads` workers. Work items
// must write to disjoint outputs; the first exception is rethrown after all
// workers stop.
template <typename F>
void parallel_for(std::size_t count, std::size_t threads, F&& fn) {
    threads = std::min(std::max<std::size_t>(threads, 1), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace alertlab
