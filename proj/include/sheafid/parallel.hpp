#pragma once

#include <cstddef>
#include <functional>

namespace sheafid {

// Worker cap: SHEAF_SYSID_THREADS if set and positive, else hardware concurrency.
std::size_t thread_cap();

// Runs body(i) for i in [0, n). Every index is executed exactly once; the
// first exception thrown (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sheafid
