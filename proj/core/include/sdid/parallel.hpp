#pragma once

#include <cstddef>
#include <functional>

namespace sdid {

/// Thread count to use: `requested` if nonzero, else the SDID_THREADS
/// environment variable, else hardware concurrency. Always >= 1.
std::size_t resolve_threads(std::size_t requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out dynamically, so callers must write results into per-index slots
/// for output to be independent of the schedule. The first exception thrown
/// by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace sdid
