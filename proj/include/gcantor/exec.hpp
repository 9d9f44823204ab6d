#pragma once

namespace gcantor {

/// Selects the serial reference loop or the OpenMP kernel. Both produce
/// identical, canonically ordered results.
enum class ExecPolicy { kSerial, kParallel };

/// Forwards to omp_set_num_threads; values < 1 are ignored.
void set_thread_count(int threads);
int thread_count();

}  // namespace gcantor
