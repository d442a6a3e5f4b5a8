#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace rcm {

inline constexpr const char* kWorkersEnv = "RCM_LAB_WORKERS";

/// Worker count from RCM_LAB_WORKERS, else the available hardware parallelism.
inline std::size_t default_workers()
{
    if (const char* env = std::getenv(kWorkersEnv)) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

struct RunOptions {
    /// 0 selects default_workers().
    std::size_t workers = 0;

    [[nodiscard]] std::size_t resolved_workers() const { return workers == 0 ? default_workers() : workers; }
};

/// Evaluates fn(i) for i in [0, count) on `workers` threads. Results are stored by
/// index, so any order-dependent reduction over the returned vector is independent
/// of scheduling.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn)
{
    using Result = std::decay_t<decltype(fn(std::size_t{0}))>;
    static_assert(!std::is_same_v<Result, bool>, "std::vector<bool> is not safe for concurrent writes");
    std::vector<Result> out(count);
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = fn(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    constexpr std::size_t kChunk = 64;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t begin = next.fetch_add(kChunk);
                    if (begin >= count) {
                        return;
                    }
                    const std::size_t end = std::min(count, begin + kChunk);
                    try {
                        for (std::size_t i = begin; i < end; ++i) {
                            out[i] = fn(i);
                        }
                    } catch (...) {
                        const std::lock_guard lock(error_mutex);
                        if (!error) {
                            error = std::current_exception();
                        }
                        next.store(count);
                        return;
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

} // namespace rcm
