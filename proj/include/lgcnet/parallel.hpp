#pragma once

#include <cstddef>
#include <functional>

namespace lgcnet {

/// Worker count from LGCNET_WORKERS, falling back to hardware concurrency.
unsigned default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Tasks are
/// claimed dynamically; callers write results into disjoint slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace lgcnet
