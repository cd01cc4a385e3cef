#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace kss {

using Engine = std::mt19937_64;

/// Derives the seed of sub-stream `index` from a root seed.
///
/// Every Monte Carlo task in the library draws from `make_engine(root, i)` for
/// a task index `i` fixed by the problem (trial number, quadrature node, chunk
/// number), never by worker identity. Results are therefore identical for any
/// thread count.
std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index);

inline Engine make_engine(std::uint64_t root, std::uint64_t index) {
  return Engine(substream_seed(root, index));
}

/// Samples per independent Monte Carlo chunk. Chunk c of a run with seed s
/// draws from make_engine(s, c).
inline constexpr std::uint64_t kMcChunk = 2048;

/// Runs `task(i)` for i in [0, n) on up to `threads` workers. Tasks must write
/// only to slots they own; callers reduce the slots in index order afterwards.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& task);

/// Worker count used when a caller passes 0.
int default_threads();

}  // namespace kss
