#include <omp.h>

#include "finsler/types.hpp"

namespace finsler {

void set_thread_count(int threads) {
  if (threads < 1) throw Error(ErrorCode::invalid_input, "thread count must be positive");
  omp_set_num_threads(threads);
}

}  // namespace finsler
