#pragma once

#include <cstddef>
#include <functional>

namespace fracspde::harness {

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Callers write
/// results by index, so the outcome does not depend on scheduling. The first
/// exception (lowest index) is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace fracspde::harness
