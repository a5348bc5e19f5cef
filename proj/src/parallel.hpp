#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef TINET_HAVE_OPENMP
#include <omp.h>
#endif

namespace tinet::detail {

// Runs fn(i) for i in [0, count). Results must be written to per-index slots;
// the first exception thrown by any iteration is rethrown after the loop.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    std::exception_ptr failure;
    std::mutex guard;
    const auto n = static_cast<long long>(count);
#ifdef TINET_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < n; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace tinet::detail
