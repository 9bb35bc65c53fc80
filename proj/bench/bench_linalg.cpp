// Copyright 2026 The gbp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Times the serial reference kernels against the OpenMP kernels and checks
// that both produce identical bits. Run manually: build/bench/gbp_bench

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gbp/linalg.hpp"
#include "gbp/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = Clock::now();
    fn();
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    best = std::min(best, elapsed.count());
  }
  return best;
}

void bench_matmul(int m, int k, int n) {
  gbp::Rng rng(42);
  const gbp::Matrix a = gbp::gaussian_matrix(m, k, rng);
  const gbp::Matrix b = gbp::gaussian_matrix(k, n, rng);

  gbp::Matrix serial_out, parallel_out;
  const double t_serial = time_best_of(3, [&] { serial_out = gbp::linalg::serial::matmul(a, b); });
  const double t_parallel = time_best_of(3, [&] { parallel_out = gbp::linalg::matmul(a, b); });
  const bool identical = serial_out == parallel_out;
  const double gflops = 2.0 * m * k * n / 1e9;
  std::printf("matmul %4dx%-4dx%-4d  serial %8.2f ms (%5.2f GF/s)  omp %8.2f ms (%5.2f GF/s)  speedup %4.2fx  bits %s\n",
              m, k, n, 1e3 * t_serial, gflops / t_serial, 1e3 * t_parallel,
              gflops / t_parallel, t_serial / t_parallel, identical ? "equal" : "DIFFER");
}

void bench_qf(int n, int p) {
  gbp::Rng rng(43);
  const gbp::Matrix a = gbp::gaussian_matrix(n, p, rng);

  gbp::Matrix serial_out, parallel_out;
  const double t_serial = time_best_of(3, [&] { serial_out = gbp::linalg::serial::qf(a); });
  const double t_parallel = time_best_of(3, [&] { parallel_out = gbp::linalg::qf(a); });
  const bool identical = serial_out == parallel_out;
  std::printf("qf     %4dx%-9d  serial %8.2f ms             omp %8.2f ms             speedup %4.2fx  bits %s\n",
              n, p, 1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel,
              identical ? "equal" : "DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run the same serial code path\n");
#endif
  bench_matmul(256, 256, 256);
  bench_matmul(512, 512, 512);
  bench_matmul(768, 256, 768);
  bench_qf(1024, 128);
  bench_qf(2048, 256);
  bench_qf(4096, 128);
  return 0;
}
