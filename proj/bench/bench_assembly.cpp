/*
 Copyright 2026 The koopman-hj Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Galerkin moment assembly: naive single-accumulator reference, the chunked
// serial path, and the OpenMP path (same chunk tree).

#include <benchmark/benchmark.h>
#include <omp.h>

#include "khj/galerkin.hpp"
#include "khj/system_model.hpp"

using namespace khj;

namespace {

void run(benchmark::State& state, Assembly mode) {
  const ControlAffineSystem sys = builtin_example1();
  const Mat E = linearize(sys).A;
  const MonomialBasis basis = monomial_basis(2, 2, static_cast<int>(state.range(1)));
  const SampleSet s =
      sample_domain(Box::symmetric(Vec::Ones(2)), static_cast<Eigen::Index>(state.range(0)), 1);
  for (auto _ : state) {
    GalerkinMoments m = assemble_moments(sys.f, E, basis, s, mode);
    benchmark::DoNotOptimize(m.G.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = mode == Assembly::Parallel ? omp_get_max_threads() : 1;
}

void BM_Naive(benchmark::State& st) { run(st, Assembly::Naive); }
void BM_SerialChunked(benchmark::State& st) { run(st, Assembly::SerialChunked); }
void BM_Parallel(benchmark::State& st) { run(st, Assembly::Parallel); }

}  // namespace

#define KHJ_ARGS ->ArgsProduct({{10000, 100000}, {5, 9}})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_Naive) KHJ_ARGS;
BENCHMARK(BM_SerialChunked) KHJ_ARGS;
BENCHMARK(BM_Parallel) KHJ_ARGS;

BENCHMARK_MAIN();
