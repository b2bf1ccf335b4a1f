#include "epsens/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace epsens::par {

int default_threads() {
  if (const char* env = std::getenv("EPSENS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return omp_get_max_threads();
}

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

void for_each_index_serial(int n, const std::function<void(int)>& body) {
  for (int i = 0; i < n; ++i) body(i);
}

void for_each_index_omp(int n, int threads, const std::function<void(int)>& body) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) body(i);
}

void for_each_index(int n, int threads, const std::function<void(int)>& body) {
  const int t = resolve_threads(threads);
  if (t == 1 || n <= 1) {
    for_each_index_serial(n, body);
  } else {
    for_each_index_omp(n, t, body);
  }
}

}  // namespace epsens::par
