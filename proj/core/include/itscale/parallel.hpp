#pragma once

#include <cstddef>
#include <functional>

namespace itscale {

/// Resolves a user-supplied thread count; 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs body(begin, end) over [0, n) split into fixed-size chunks. Chunk
/// boundaries depend only on n and chunk_size, never on the thread count, so a
/// body that writes results into per-index slots yields identical output for
/// any number of workers. Exceptions thrown by a worker are rethrown here.
void parallel_for_chunks(std::size_t n, std::size_t chunk_size, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace itscale
