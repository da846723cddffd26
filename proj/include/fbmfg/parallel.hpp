#pragma once

#include <functional>

namespace fbmfg {

/// Worker count for node loops, read once from FBMFG_THREADS (default 1).
int worker_threads();

/// Runs body(k) for k in [begin, end), split into contiguous chunks over
/// worker_threads() threads. Exceptions from any chunk are rethrown.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace fbmfg
