#pragma once

#include <cstddef>
#include <functional>

namespace gdgs {

/// Process-wide worker cap used by the renderer and solvers. Defaults to 1.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Runs fn(i) for i in [0, n) over at most thread_count() workers.
/// Work items are disjoint; callers own any reduction and keep it ordered.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gdgs
