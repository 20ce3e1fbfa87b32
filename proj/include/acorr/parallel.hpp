#pragma once

#include <cstddef>
#include <functional>

namespace acorr {

/// Upper bound on worker threads for per-view parallel loops. Defaults to the
/// ACORR_THREADS environment variable, else 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index writes only its own slot, so the
/// result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace acorr
