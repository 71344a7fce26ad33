#pragma once

#include <functional>

namespace impact {

/// Worker count: IMPACT_GAME_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Each
/// index runs exactly once; the first exception thrown is rethrown.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace impact
