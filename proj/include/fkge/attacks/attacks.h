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

#ifndef FKGE_ATTACKS_ATTACKS_H_
#define FKGE_ATTACKS_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fkge/common/matrix.h"
#include "fkge/common/rng.h"
#include "fkge/kg/federated.h"
#include "fkge/kg/knowledge_graph.h"
#include "fkge/kge/embedding_store.h"
#include "fkge/parallel/kernels.h"

// Membership inference against the federated protocol. Every entry point
// takes the observables its threat model grants and nothing else: the
// server sees uploads, a client sees its own upload, the broadcast and its
// own private model.
namespace fkge::attacks {

// ---------------------------------------------------------------- threshold

struct SweepPoint {
  double tau = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct AttackTrace {
  int round = 0;
  std::vector<double> statistic;
  std::vector<bool> labels;
  std::vector<SweepPoint> sweep;
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr), by fpr
  double best_f1 = 0.0;
  double best_tau = 0.0;
  double auc = 0.0;
};

// Decision `statistic >= tau` at -inf, every midpoint between consecutive
// distinct statistics, and +inf.
AttackTrace SweepThreshold(std::span<const double> statistics, const std::vector<bool>& labels);

// One record per candidate followed by a summary block.
void WriteTrace(const AttackTrace& trace, std::span<const kg::Candidate> candidates,
                const std::filesystem::path& path);
void WriteRoc(const AttackTrace& trace, const std::filesystem::path& path);

// ----------------------------------------------------------------------- SI

struct SiObservables {
  Matrix victim_upload;                     // server row order
  std::vector<std::uint32_t> victim_rows;   // rows of entities the victim holds
  const kg::Vocabulary* entity_names = nullptr;  // aligned global vocabulary
  const kg::AuxSchema* aux = nullptr;
  kge::ModelKind model = kge::ModelKind::kTransE;
  std::size_t dim = 0;
  std::size_t n_relations = 0;
};

// Relation embedding implied by an entity pair: t - h, or t / h per complex
// coordinate for RotatE when every |h_i| > 1e-8.
std::vector<double> EntityToRelation(kge::ModelKind model, std::size_t dim,
                                     std::span<const double> head, std::span<const double> tail);

struct RelationCandidates {
  Matrix embeddings;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (head row, tail row)
};

// All ordered pairs j != k of `rows`, or `cap` of them drawn uniformly.
// Throws UnsupportedModelError for bilinear models.
RelationCandidates SiEnumerateRelations(const Matrix& E, std::span<const std::uint32_t> rows,
                                        kge::ModelKind model, std::size_t dim,
                                        std::optional<std::size_t> cap, Rng& rng);

struct SiClusters {
  Matrix centers;
  std::vector<double> radii;  // mean member distance; +inf when empty
  std::vector<std::size_t> sizes;
  std::vector<bool> concentrated;
  int iterations = 0;
};

// k-means (k = 2 n_r, k-means++ seeding, at most 100 Lloyd steps).
// Clusters whose radius is strictly below the `quantile` radius are
// concentrated.
SiClusters SiCluster(const Matrix& candidates, std::size_t n_r, std::uint64_t seed,
                     double quantile = 0.5, parallel::Exec exec = parallel::Exec::kParallel);

struct SiDecision {
  bool exist = false;
  bool in_cluster = false;
  bool no_aux = false;
  bool evaluable = true;
};

SiDecision SiInfer(const kg::Candidate& candidate, const SiObservables& obs,
                   const SiClusters& clusters);

// Full attack on one upload: enumerate, cluster, infer.
std::vector<SiDecision> SiAttack(const SiObservables& obs, std::span<const kg::Candidate> candidates,
                                 std::optional<std::size_t> cap, std::uint64_t seed,
                                 double quantile = 0.5);

// ---------------------------------------------------------------------- CIP

struct CipObservables {
  Matrix own_upload;  // server row order
  Matrix broadcast;
  int advertised_clients = 0;
  const kge::EmbeddingStore* own_model = nullptr;  // private relations
  const kg::Vocabulary* own_relations = nullptr;
  const kg::Vocabulary* entity_names = nullptr;  // aligned global vocabulary
  std::vector<bool> held;  // rows of the adversary's own entities; empty = all
};

// Held rows whose broadcast differs from the upload. Rows the client does not
// hold carry the previous broadcast and say nothing about overlap.
std::vector<std::uint32_t> CipDetectOverlap(const Matrix& own_upload, const Matrix& broadcast,
                                            const std::vector<bool>& held = {});

// (N * E_b - E_u) / (N - 1) on detected rows, E_b elsewhere.
Matrix CipExtract(const Matrix& broadcast, const Matrix& own_upload, int advertised_clients,
                  const std::vector<bool>& held = {});

// f(h1, t1) / f(h2, t2) on raw signed scores, extracted rows over own rows.
double CipStatistic(kge::ModelKind model, std::span<const double> rel,
                    std::span<const double> h1, std::span<const double> t1,
                    std::span<const double> h2, std::span<const double> t2);

struct Decision {
  bool exist = false;
  double statistic = 0.0;
};

Decision CipInfer(double statistic, double tau);

// Statistic per candidate; nullopt when the candidate is not evaluable
// (entity outside the detected overlap or relation unknown to the
// adversary).
std::vector<std::optional<double>> CipAttack(const CipObservables& obs,
                                             std::span<const kg::Candidate> candidates);

// ---------------------------------------------------------------------- CIA

// Negates the target rows. Every target must be held by the adversary.
Matrix CiaReverse(const Matrix& upload, std::span<const std::uint32_t> targets,
                  const std::vector<bool>& held);

// Distance-style plausibility: -f (the norm itself for distance models).
double CiaScore(kge::ModelKind model, std::span<const double> rel, std::span<const double> h,
                std::span<const double> t);

Decision CiaInfer(double s1, double s2, double tau);

struct CiaObservables {
  Matrix broadcast;  // broadcast to score against
  const kge::EmbeddingStore* own_model = nullptr;
  const kg::Vocabulary* own_relations = nullptr;
  const kg::Vocabulary* entity_names = nullptr;
};

// s per candidate; nullopt when the relation is unknown to the adversary.
std::vector<std::optional<double>> CiaScores(const CiaObservables& obs,
                                             std::span<const kg::Candidate> candidates);

// Ratio s1/s2 with the guard |s2| < 1e-12 -> +inf.
double RatioStatistic(double num, double den);

}  // namespace fkge::attacks

#endif  // FKGE_ATTACKS_ATTACKS_H_
