#pragma once

#include <cstddef>
#include <functional>

namespace januslab {

// Worker count used by the renderer and metrics. Defaults to 1; the CLI sets
// it from --threads / JLAB_THREADS.
void set_thread_count(int threads);
int thread_count() noexcept;

// Runs body(chunk) for chunk in [0, chunks). Chunks are distributed over the
// configured workers; the call returns once every chunk is done. Callers that
// reduce across chunks must merge in chunk order so results do not depend on
// the worker count.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace januslab
