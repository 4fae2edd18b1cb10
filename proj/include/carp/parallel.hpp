#pragma once

#include <cstddef>
#include <functional>

namespace carp {

/// Global cap on worker threads. Zero (the default) means: CARP_THREADS from
/// the environment if set, otherwise std::thread::hardware_concurrency().
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Calls body(i) for i in [0, count) on up to thread_limit() workers using
/// contiguous static chunks. The body must only write to slot-i state. The
/// first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace carp
