#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace agewire {

/// Worker count: AGEWIRE_THREADS if set (>= 1), else hardware concurrency.
std::size_t default_threads();

/// Runs body(i) for i in [0, n) over `threads` workers in contiguous blocks.
/// Results must go to index-addressed slots; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

/// Like parallel_for but hands each worker a [begin, end) range.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t threads = 0);

}  // namespace agewire
