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

#ifndef FKGE_EVAL_METRICS_H_
#define FKGE_EVAL_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "fkge/kg/knowledge_graph.h"
#include "fkge/kge/embedding_store.h"

namespace fkge::eval {

enum class Direction { kTail, kHead };

// Filtered rank of the true entity: 1 + number of other candidates scoring
// at least as high, skipping candidates that form a known fact in `filter`.
// Ties count against the true entity.
std::size_t RankEntity(const kge::EmbeddingStore& store, const kg::Triple& query,
                       Direction dir, const kg::KnowledgeGraph& filter);

double Mrr(std::span<const std::size_t> ranks);
double HitsAt(std::span<const std::size_t> ranks, std::size_t n);
double F1(double precision, double recall);

struct LinkPrediction {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t queries = 0;
};

// Both directions for every triple, filtered against `filter`.
LinkPrediction EvaluateLinkPrediction(const kge::EmbeddingStore& store,
                                      std::span<const kg::Triple> triples,
                                      const kg::KnowledgeGraph& filter);

}  // namespace fkge::eval

#endif  // FKGE_EVAL_METRICS_H_
