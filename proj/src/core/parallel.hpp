#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace cespdc {

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs body(begin, end) over contiguous chunks of [0, n). Each index belongs to
// exactly one chunk, so per-index results do not depend on the worker count.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    workers = std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1));
    if (workers <= 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
}

}  // namespace cespdc
