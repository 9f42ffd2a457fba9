#pragma once

#include <cstddef>
#include <exception>
#include <omp.h>

namespace tessera {

/// Number of OpenMP threads used by the parallel kernels.
inline int thread_count() { return omp_get_max_threads(); }
inline void set_thread_count(int n)
{
  if (n > 0)
    omp_set_num_threads(n);
}

/// Runs body(i) for i in [0, n). Every index writes only its own output slot,
/// so results are independent of the thread count. An exception thrown by
/// body is rethrown after the loop; with several, the lowest index wins.
template<class Body>
void parallel_for(std::size_t n, Body&& body)
{
  const auto count = static_cast<std::ptrdiff_t>(n);
  std::exception_ptr error;
  std::ptrdiff_t error_index = count;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(tessera_parallel_for)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace tessera
