#pragma once

#include <cstddef>
#include <functional>

namespace optresp {

/// Worker count: OPTRESP_THREADS if set and positive, else the hardware
/// concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, count) over thread_count() workers in contiguous
/// blocks. Rethrows the first exception after all workers finish.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body);

}  // namespace optresp
