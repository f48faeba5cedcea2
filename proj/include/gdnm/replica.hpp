#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace gdnm {

/// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned effective_workers(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on a pool of workers and returns the
/// results in index order. The result vector never depends on the number of
/// workers. If any call throws, the exception from the lowest index is
/// rethrown after all workers finish.
template <class Fn>
auto run_replicas(std::size_t count, unsigned workers, Fn&& fn) {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<Result> results(count);
    const unsigned pool = std::min<std::size_t>(effective_workers(workers), std::max<std::size_t>(count, 1));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;
    constexpr std::size_t chunk = 16;

    auto work = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    results[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                }
            }
        }
    };

    if (pool <= 1) {
        work();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(pool);
        for (unsigned w = 0; w < pool; ++w) threads.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    return results;
}

} // namespace gdnm
