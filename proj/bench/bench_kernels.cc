/*
 * Copyright 2026 The FKGE Privacy Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "fkge/common/rng.h"
#include "fkge/kg/knowledge_graph.h"
#include "fkge/parallel/kernels.h"

namespace {

using namespace fkge;

struct Points {
  Matrix points, centers;
  std::vector<std::uint32_t> assign;
  std::vector<double> dist2;
};

Points MakePoints(std::size_t n, std::size_t k, std::size_t d) {
  Points p{Matrix(n, d), Matrix(k, d), std::vector<std::uint32_t>(n), std::vector<double>(n)};
  Rng rng(1);
  for (double& v : p.points.data()) v = StandardNormal(rng);
  for (double& v : p.centers.data()) v = StandardNormal(rng);
  return p;
}

void BM_AssignClusters(benchmark::State& state, parallel::Exec exec) {
  auto p = MakePoints(static_cast<std::size_t>(state.range(0)), 24, 32);
  for (auto _ : state) {
    parallel::AssignClusters(exec, p.points, p.centers, p.assign, p.dist2);
    benchmark::DoNotOptimize(p.dist2.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RankQueries(benchmark::State& state, parallel::Exec exec) {
  const auto syn = kg::GenerateSynthetic(static_cast<std::size_t>(state.range(0)), 12,
                                         4 * static_cast<std::size_t>(state.range(0)), 3);
  Rng rng(2);
  const auto store = kge::EmbeddingStore::Random(kge::ModelKind::kTransE, syn.graph.num_entities(),
                                                 syn.graph.num_relations(), 32, rng);
  const auto& q = syn.graph.triples();
  const std::span<const kg::Triple> queries(q.data(), std::min<std::size_t>(q.size(), 500));
  for (auto _ : state) {
    auto ranks = parallel::RankQueries(exec, store, queries, eval::Direction::kTail, syn.graph);
    benchmark::DoNotOptimize(ranks.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(queries.size()));
}

BENCHMARK_CAPTURE(BM_AssignClusters, serial, parallel::Exec::kSerial)->Arg(10000)->Arg(90000);
BENCHMARK_CAPTURE(BM_AssignClusters, parallel, parallel::Exec::kParallel)->Arg(10000)->Arg(90000);
BENCHMARK_CAPTURE(BM_RankQueries, serial, parallel::Exec::kSerial)->Arg(300)->Arg(3000);
BENCHMARK_CAPTURE(BM_RankQueries, parallel, parallel::Exec::kParallel)->Arg(300)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
