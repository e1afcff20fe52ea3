#include "agewire/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace agewire {

std::size_t default_threads() {
    if (const char* env = std::getenv("AGEWIRE_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t threads) {
    if (n == 0) return;
    if (threads == 0) threads = default_threads();
    threads = std::min(threads, n);
    if (threads == 1) {
        body(0, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        std::size_t begin = n * t / threads;
        std::size_t end = n * (t + 1) / threads;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads) {
    parallel_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) body(i);
        },
        threads);
}

}  // namespace agewire
