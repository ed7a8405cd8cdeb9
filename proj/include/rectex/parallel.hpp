#pragma once

#include <cstddef>
#include <functional>

namespace rectex {

// Worker cap: RECTEX_THREADS if set (minimum 1), hardware concurrency
// otherwise. Read once per process.
std::size_t worker_count();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks, one
// per worker, so callers writing into preallocated slot i get deterministic
// output regardless of scheduling. With one worker (or a tiny count) it runs
// inline. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace rectex
