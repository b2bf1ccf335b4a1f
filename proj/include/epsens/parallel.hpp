#pragma once

#include <functional>

namespace epsens::par {

// Thread count resolution: explicit value > 0 wins, otherwise the EPSENS_THREADS
// environment variable, otherwise the OpenMP default.
int default_threads();
int resolve_threads(int requested);

// Serial reference implementation of the replicate map. Kept alongside the
// OpenMP kernel so tests can assert bit-identical results and the benchmark
// can compare them.
void for_each_index_serial(int n, const std::function<void(int)>& body);

// OpenMP kernel; each index is independent work.
void for_each_index_omp(int n, int threads, const std::function<void(int)>& body);

// Dispatch: threads == 1 runs the serial reference, anything else the OpenMP
// kernel. Results must not depend on which path ran.
void for_each_index(int n, int threads, const std::function<void(int)>& body);

}  // namespace epsens::par
