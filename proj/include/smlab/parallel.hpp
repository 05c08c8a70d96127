#pragma once

#include <cstddef>
#include <functional>

namespace smlab {

/// Number of worker threads to use: SMLAB_THREADS overrides `requested`;
/// requested 0 falls back to the process default, then hardware concurrency.
int resolve_threads(int requested);

/// Process-wide default used when a call site passes 0 (set from --threads).
void set_default_threads(int threads);

/// Runs fn(i) for i in [0, n). Each index writes only its own slots, so the
/// result is independent of the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace smlab
