#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace revgender {

/// Runs fn(0..chunk_count-1) across up to `threads` workers. Chunk
/// boundaries are caller-defined and fixed, so any reduction done in chunk
/// order afterwards is independent of scheduling and thread count.
inline void parallel_chunks(int chunk_count, int threads, const std::function<void(int)>& fn) {
    if (chunk_count <= 0) return;
    if (threads <= 1 || chunk_count == 1) {
        for (int c = 0; c < chunk_count; ++c) fn(c);
        return;
    }
    const int workers = std::min(threads, chunk_count);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int c = next.fetch_add(1);
                if (c >= chunk_count) break;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace revgender
