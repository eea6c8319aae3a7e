#pragma once

#include <cstddef>
#include <functional>

namespace qmcpde {

// Worker count used by library loops. Defaults to the QMCPDE_THREADS
// environment variable, else 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(i) for i in [0, count), split into contiguous static chunks.
// Callers write results into per-index slots and reduce afterwards, which
// keeps results independent of the worker count.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body);

} // namespace qmcpde
