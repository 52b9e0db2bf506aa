#pragma once

#include <cstddef>
#include <functional>

namespace orbita {

/// Worker count: hardware concurrency, capped by ORBITA_THREADS when set.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; results
/// must be written to preallocated slots so the outcome does not depend on
/// scheduling. The first exception thrown by any iteration is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace orbita
