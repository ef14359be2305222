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

#include "fkge/eval/metrics.h"

#include <algorithm>
#include <vector>

#include "fkge/common/errors.h"
#include "fkge/kge/scoring.h"
#include "fkge/parallel/kernels.h"

namespace fkge::eval {

std::size_t RankEntity(const kge::EmbeddingStore& store, const kg::Triple& query,
                       Direction dir, const kg::KnowledgeGraph& filter) {
  std::vector<double> rel(store.entity_width());
  store.RelationRow(query.rel, rel);
  const auto& E = store.entities();
  const double target = kge::ScoreRows(store.model(), E.row(query.head), rel, E.row(query.tail));
  const auto truth = dir == Direction::kTail ? query.tail : query.head;
  std::size_t above = 0;
  for (kg::EntityId e = 0; e < store.num_entities(); ++e) {
    if (e == truth) continue;
    kg::Triple cand = query;
    (dir == Direction::kTail ? cand.tail : cand.head) = e;
    if (filter.Contains(cand)) continue;
    const double s = kge::ScoreRows(store.model(), E.row(cand.head), rel, E.row(cand.tail));
    if (s >= target) ++above;
  }
  return above + 1;
}

double Mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ArgumentError("MRR of an empty rank list");
  double s = 0.0;
  for (std::size_t r : ranks) s += 1.0 / static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

double HitsAt(std::span<const std::size_t> ranks, std::size_t n) {
  if (ranks.empty()) throw ArgumentError("Hits@N of an empty rank list");
  if (n < 1) throw ArgumentError("Hits@N needs N >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(),
                                  [n](std::size_t r) { return r <= n; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double F1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

LinkPrediction EvaluateLinkPrediction(const kge::EmbeddingStore& store,
                                      std::span<const kg::Triple> triples,
                                      const kg::KnowledgeGraph& filter) {
  auto ranks = parallel::RankQueries(parallel::Exec::kParallel, store, triples,
                                     Direction::kTail, filter);
  const auto head = parallel::RankQueries(parallel::Exec::kParallel, store, triples,
                                          Direction::kHead, filter);
  ranks.insert(ranks.end(), head.begin(), head.end());
  LinkPrediction m;
  m.queries = ranks.size();
  if (ranks.empty()) return m;
  m.mrr = Mrr(ranks);
  m.hits1 = HitsAt(ranks, 1);
  m.hits3 = HitsAt(ranks, 3);
  m.hits10 = HitsAt(ranks, 10);
  return m;
}

}  // namespace fkge::eval
