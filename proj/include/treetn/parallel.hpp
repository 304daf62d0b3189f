#pragma once

#include <cstddef>
#include <functional>

namespace treetn {

/// Worker count used by grid sweeps; defaults to 1.
void set_thread_count(int n);
int thread_count();

/// Splits [0, n) into fixed chunks of `chunk` items and calls
/// body(begin, end, chunk_index) for each. Chunk boundaries do not depend on
/// the thread count, so per-chunk partial results reduce deterministically.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body, bool serial = false);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) { return (n + chunk - 1) / chunk; }

}  // namespace treetn
