#ifndef GAZECAP_PARALLEL_HPP
#define GAZECAP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace gazecap {

/// Worker cap: GAZECAP_THREADS if set to a positive integer, else the number
/// of logical cores (at least 1).
int worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into slot i, so the merged
/// output order never depends on scheduling. The first exception thrown by
/// any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gazecap

#endif  // GAZECAP_PARALLEL_HPP
