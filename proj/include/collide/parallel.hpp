#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace collide {

/// Worker count: explicit value if positive, else COLLIDE_THREADS, else the
/// hardware concurrency (at least 1).
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("COLLIDE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on `threads` workers. Work is handed out in
/// small blocks; each index is processed exactly once, so callers that write to
/// slot i get results independent of scheduling. If bodies throw, the exception
/// from the lowest index is rethrown after all workers stop.
template <class Body>
void for_each_trial(std::uint64_t count, unsigned threads, Body&& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    constexpr std::uint64_t block = 64;
    std::atomic<std::uint64_t> next{0};
    // Indices at or above `limit` are skipped once some index below it failed;
    // everything below still runs, so the reported failure is the lowest one.
    std::atomic<std::uint64_t> limit{std::numeric_limits<std::uint64_t>::max()};
    std::mutex err_mutex;
    std::exception_ptr err;

    auto worker = [&] {
        for (;;) {
            const std::uint64_t start = next.fetch_add(block);
            if (start >= count || start >= limit.load()) return;
            const std::uint64_t end = std::min(count, start + block);
            for (std::uint64_t i = start; i < end && i < limit.load(); ++i) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(err_mutex);
                    if (i < limit.load()) {
                        limit.store(i);
                        err = std::current_exception();
                    }
                    break;
                }
            }
        }
    };
    const auto n = static_cast<unsigned>(std::min<std::uint64_t>(threads, (count + block - 1) / block));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace collide
