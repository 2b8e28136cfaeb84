#pragma once

#include <exception>
#include <mutex>

#include <omp.h>

namespace ecms {

/// Execution policy for the data-parallel loops (per element / per edge).
/// `serial` is the reference path the tests compare against.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n). Tasks are independent and write only to
/// slot i of their outputs, so both policies produce identical results.
/// The first exception thrown by any task is rethrown on the caller thread.
template <class Body> void for_each_index(Execution exec, int n, Body &&body) {
  if (exec == Execution::serial || n < 2) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error)
        first_error = std::current_exception();
    }
  }
  if (first_error)
    std::rethrow_exception(first_error);
}

inline int max_threads() { return omp_get_max_threads(); }

} // namespace ecms
