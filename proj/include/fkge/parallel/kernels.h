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

#ifndef FKGE_PARALLEL_KERNELS_H_
#define FKGE_PARALLEL_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fkge/common/matrix.h"
#include "fkge/eval/metrics.h"
#include "fkge/kg/knowledge_graph.h"
#include "fkge/kge/embedding_store.h"

// Hot loops with two implementations each. The serial versions are the
// reference the OpenMP versions are tested against; both must produce the
// same results bit for bit.
namespace fkge::parallel {

enum class Exec { kSerial, kParallel };

// Nearest center (lowest index on ties) and squared distance per point.
void AssignClustersSerial(const Matrix& points, const Matrix& centers,
                          std::span<std::uint32_t> assign, std::span<double> dist2);
void AssignClustersParallel(const Matrix& points, const Matrix& centers,
                            std::span<std::uint32_t> assign, std::span<double> dist2);
void AssignClusters(Exec exec, const Matrix& points, const Matrix& centers,
                    std::span<std::uint32_t> assign, std::span<double> dist2);

// Filtered ranks for every query in one direction.
std::vector<std::size_t> RankQueriesSerial(const kge::EmbeddingStore& store,
                                           std::span<const kg::Triple> queries,
                                           eval::Direction dir,
                                           const kg::KnowledgeGraph& filter);
std::vector<std::size_t> RankQueriesParallel(const kge::EmbeddingStore& store,
                                             std::span<const kg::Triple> queries,
                                             eval::Direction dir,
                                             const kg::KnowledgeGraph& filter);
std::vector<std::size_t> RankQueries(Exec exec, const kge::EmbeddingStore& store,
                                     std::span<const kg::Triple> queries,
                                     eval::Direction dir, const kg::KnowledgeGraph& filter);

}  // namespace fkge::parallel

#endif  // FKGE_PARALLEL_KERNELS_H_
