#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mlwos {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Indices are
/// handed out in chunks; fn must only write to slots owned by index i.
/// If any call throws, the exception from the smallest failing index is
/// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::uint64_t n, unsigned threads, Fn&& fn) {
    constexpr std::uint64_t kChunk = 64;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(threads, 1u), (n + kChunk - 1) / kChunk));
    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::uint64_t error_index = n;

    auto body = [&] {
        for (;;) {
            const std::uint64_t begin = next.fetch_add(kChunk);
            if (begin >= n) return;
            const std::uint64_t end = std::min(n, begin + kChunk);
            for (std::uint64_t i = begin; i < end; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                    break;
                }
            }
        }
    };

    if (workers <= 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
        body();
    }
    if (error) std::rethrow_exception(error);
}

/// Logical core count, at least 1.
inline unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace mlwos
