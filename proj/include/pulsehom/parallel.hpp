#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pulsehom {

// Runs fn(chunk) for every chunk in [0, n_chunks) on up to `threads`
// workers. Work is split into fixed chunks chosen by the caller, so results
// written per chunk do not depend on the worker count.
template <typename Fn>
void for_each_chunk(std::size_t n_chunks, unsigned threads, Fn&& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), n_chunks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n_chunks; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n_chunks;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace pulsehom
