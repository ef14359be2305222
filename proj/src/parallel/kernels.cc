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

#include "fkge/parallel/kernels.h"

#include <limits>

#include "fkge/common/errors.h"

namespace fkge::parallel {

namespace {

void AssignOne(const Matrix& points, const Matrix& centers, std::size_t i,
               std::span<std::uint32_t> assign, std::span<double> dist2) {
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t arg = 0;
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = SquaredDistance(points.row(i), centers.row(c));
    if (d < best) {
      best = d;
      arg = static_cast<std::uint32_t>(c);
    }
  }
  assign[i] = arg;
  dist2[i] = best;
}

void CheckShapes(const Matrix& points, const Matrix& centers,
                 std::span<std::uint32_t> assign, std::span<double> dist2) {
  if (centers.rows() == 0) throw ArgumentError("no cluster centers");
  if (points.cols() != centers.cols()) throw ArgumentError("point/center width mismatch");
  if (assign.size() != points.rows() || dist2.size() != points.rows()) {
    throw ArgumentError("output spans must have one slot per point");
  }
}

}  // namespace

void AssignClustersSerial(const Matrix& points, const Matrix& centers,
                          std::span<std::uint32_t> assign, std::span<double> dist2) {
  CheckShapes(points, centers, assign, dist2);
  for (std::size_t i = 0; i < points.rows(); ++i) AssignOne(points, centers, i, assign, dist2);
}

void AssignClustersParallel(const Matrix& points, const Matrix& centers,
                            std::span<std::uint32_t> assign, std::span<double> dist2) {
  CheckShapes(points, centers, assign, dist2);
  const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    AssignOne(points, centers, static_cast<std::size_t>(i), assign, dist2);
  }
}

void AssignClusters(Exec exec, const Matrix& points, const Matrix& centers,
                    std::span<std::uint32_t> assign, std::span<double> dist2) {
  if (exec == Exec::kParallel) {
    AssignClustersParallel(points, centers, assign, dist2);
  } else {
    AssignClustersSerial(points, centers, assign, dist2);
  }
}

std::vector<std::size_t> RankQueriesSerial(const kge::EmbeddingStore& store,
                                           std::span<const kg::Triple> queries,
                                           eval::Direction dir,
                                           const kg::KnowledgeGraph& filter) {
  std::vector<std::size_t> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out[i] = eval::RankEntity(store, queries[i], dir, filter);
  }
  return out;
}

std::vector<std::size_t> RankQueriesParallel(const kge::EmbeddingStore& store,
                                             std::span<const kg::Triple> queries,
                                             eval::Direction dir,
                                             const kg::KnowledgeGraph& filter) {
  std::vector<std::size_t> out(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = eval::RankEntity(store, queries[i], dir, filter);
  }
  return out;
}

std::vector<std::size_t> RankQueries(Exec exec, const kge::EmbeddingStore& store,
                                     std::span<const kg::Triple> queries,
                                     eval::Direction dir, const kg::KnowledgeGraph& filter) {
  return exec == Exec::kParallel ? RankQueriesParallel(store, queries, dir, filter)
                                 : RankQueriesSerial(store, queries, dir, filter);
}

}  // namespace fkge::parallel
