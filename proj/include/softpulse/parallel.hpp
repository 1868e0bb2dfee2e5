#pragma once

#include <functional>

namespace softpulse {

// Thread count resolution: explicit request > SOFTPULSE_THREADS > hardware.
int resolve_threads(int requested);

// Runs fn(0..n-1) on up to `threads` workers.  Exceptions are rethrown on the
// calling thread.  Work items must be independent; callers are responsible
// for reducing results in a fixed order.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace softpulse
