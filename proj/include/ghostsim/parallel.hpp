#pragma once

#include <cstdint>
#include <functional>

namespace ghostsim {

/// Worker count used when a caller passes threads == 0: hardware
/// concurrency, capped by the GHOSTSIM_THREADS environment variable when
/// set.
int default_thread_count();

/// Runs fn(begin, end) over [0, total) split into fixed-size chunks.
/// The chunk grid depends only on (total, chunk), never on the worker
/// count, so any writer that owns its chunk range produces identical
/// output for 1 or N workers.
void parallel_for_chunks(std::int64_t total, std::int64_t chunk, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace ghostsim
