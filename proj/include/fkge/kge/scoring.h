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

#ifndef FKGE_KGE_SCORING_H_
#define FKGE_KGE_SCORING_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fkge/common/matrix.h"
#include "fkge/kg/knowledge_graph.h"
#include "fkge/kge/embedding_store.h"

namespace fkge::kge {

using kg::EntityId;
using kg::RelationId;
using kg::Triple;

// How the margin enters the logistic loss.
//  kVerbatim: logit = f - gamma (positives), gamma - f (negatives) for every
//             model, exactly as written for the split loss.
//  kDistance: same for bilinear models; translational models use
//             logit = gamma + f = gamma - ||.|| (and -gamma - f for negatives),
//             i.e. gamma acts as a distance margin.
enum class MarginConvention { kVerbatim, kDistance };

struct LossParams {
  double gamma = 10.0;
  std::size_t n_neg = 256;
  double adv_temp = 1.0;
  MarginConvention margin = MarginConvention::kDistance;
};

void ValidateLossParams(const LossParams& p);

enum class NegativeMode { kSelfAdversarial, kUniform };

// Score f_r(h, t) from raw rows. `rel` is the materialized relation row
// (width = entity width; RotatE as (cos, sin)).
double ScoreRows(ModelKind model, std::span<const double> head,
                 std::span<const double> rel, std::span<const double> tail);

double Score(const EmbeddingStore& store, const Triple& triple);

// Numerically stable log(1 + e^x) = -log(sigmoid(-x)).
double Softplus(double x);
double Sigmoid(double x);

double PositiveLogit(ModelKind model, double score, const LossParams& p);
double NegativeLogit(ModelKind model, double score, const LossParams& p);

// -log sigmoid(positive logit).
double LossPositive(const EmbeddingStore& store, const Triple& triple,
                    const LossParams& params);

// Weights p_i over the negatives: softmax(adv_temp * score) or uniform 1/n.
std::vector<double> NegativeWeights(const EmbeddingStore& store,
                                    std::span<const Triple> negatives,
                                    const LossParams& params, NegativeMode mode);

// -sum_i p_i log sigmoid(negative logit_i). `pos` is informational only.
double LossNegative(const EmbeddingStore& store, const std::optional<Triple>& pos,
                    std::span<const Triple> negatives, const LossParams& params,
                    NegativeMode mode);

// Gradient restricted to the rows a triple touches. Relation rows are in
// parameter space (phase angles for RotatE). Ordered maps keep iteration
// deterministic.
struct SparseGradient {
  std::map<EntityId, std::vector<double>> rows;
  std::map<RelationId, std::vector<double>> rel_rows;

  void AddEntity(EntityId id, double scale, std::span<const double> g);
  void AddRelation(RelationId id, double scale, std::span<const double> g);
  // Flattened L2 norm over entity rows only.
  double EntityNorm() const;
  void ScaleEntities(double s);
};

SparseGradient GradPositive(const EmbeddingStore& store, const Triple& triple,
                            const LossParams& params);

// Self-adversarial weights are held constant during differentiation.
SparseGradient GradNegative(const EmbeddingStore& store, const std::optional<Triple>& pos,
                            std::span<const Triple> negatives, const LossParams& params,
                            NegativeMode mode);

struct BatchGradient {
  std::vector<SparseGradient> per_example;  // entity rows only
  std::set<EntityId> active_rows;
};

BatchGradient BatchEntityGradient(const EmbeddingStore& store,
                                  std::span<const Triple> batch,
                                  const LossParams& params);

// Dense accumulators used by the training loops.
struct DenseGradient {
  Matrix entities;
  Matrix relations;  // parameter space

  explicit DenseGradient(const EmbeddingStore& store)
      : entities(store.num_entities(), store.entity_width()),
        relations(store.num_relations(), store.relation_param_width()) {}
  void Zero();
};

// Adds scale * dL_p/dtheta into `grad`; returns the positive loss.
double AccumulatePositive(const EmbeddingStore& store, const Triple& triple,
                          const LossParams& params, double scale, DenseGradient& grad);
// Adds scale * dL_n/dtheta into `grad`; returns the negative loss.
double AccumulateNegative(const EmbeddingStore& store, std::span<const Triple> negatives,
                          const LossParams& params, NegativeMode mode, double scale,
                          DenseGradient& grad);

}  // namespace fkge::kge

#endif  // FKGE_KGE_SCORING_H_
