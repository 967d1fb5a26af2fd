#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace degchemo {

int default_threads();

/// Runs fn(0..n-1) on up to `threads` workers. Each index runs exactly once;
/// the first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Results land at their index, so output order never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, int threads, Fn&& fn) {
    std::vector<T> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace degchemo
