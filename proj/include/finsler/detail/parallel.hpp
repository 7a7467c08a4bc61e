#pragma once

#include <exception>

#include "finsler/types.hpp"

namespace finsler::detail {

/// Runs fn(i) for i in [0, n), in parallel when requested. Each iteration
/// must write only its own outputs. The exception of the lowest failing index
/// is rethrown, so failures are reported the same way serially and in parallel.
template <class Fn>
void parallel_for(int n, Execution exec, Fn&& fn) {
  std::exception_ptr error;
  int error_index = n;
#pragma omp parallel for schedule(dynamic, 8) if (exec == Execution::parallel)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(finsler_parallel_error)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace finsler::detail
