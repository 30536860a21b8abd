// OpenMP helpers. Kernels with data-parallel inner loops come in two
// flavours: a plain serial reference and an OpenMP version. The active
// flavour is a process-wide switch so tests can compare them exactly.

#pragma once

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
#endif

namespace dyt {

enum class ExecMode { Serial, Parallel };

// Defaults to Parallel when compiled with OpenMP.
ExecMode exec_mode();
void set_exec_mode(ExecMode m);

inline int worker_count() {
#ifdef _OPENMP
  return exec_mode() == ExecMode::Parallel ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

}  // namespace dyt
