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

#ifndef FKGE_KG_FEDERATED_H_
#define FKGE_KG_FEDERATED_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkge/common/rng.h"
#include "fkge/kg/knowledge_graph.h"

namespace fkge::kg {

// One client's private knowledge graph. `graph` uses client-local ids and
// holds every triple of the client; train/valid/test partition it.
struct ClientDataset {
  int client_id = 0;
  KnowledgeGraph graph;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::vector<EntityId> global_entity;      // local id -> source graph id
  std::vector<RelationId> global_relation;  // local id -> source graph id
};

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

struct Partition {
  std::vector<ClientDataset> clients;
  // Source entity id -> ids of the clients holding it (ascending).
  std::vector<std::vector<int>> holders;
  // Source entity ids held by two or more clients, ascending.
  std::vector<EntityId> overlapping;
};

// Splits `kg` across `m` clients. A fraction `overlap_frac` of the entities is
// held by at least two clients; the rest by exactly one. A triple goes to a
// client only if both endpoints are held there, and a triple eligible for
// several clients is given to exactly one of them.
Partition PartitionFederated(const KnowledgeGraph& kg, int m, double overlap_frac,
                             const SplitFractions& split, std::uint64_t seed);

// Text manifest: one block per client listing held source entity ids and the
// split sizes, followed by the overlap set.
void WritePartitionManifest(const Partition& p, const std::filesystem::path& path);

// Poisson subsample: each training triple kept independently with
// probability q = batch_size / |train|.
std::vector<Triple> SampleBatch(const ClientDataset& client, double batch_size,
                                Rng& rng);

// Tail-corruption negatives (h, r, t') with t' != t and, when possible within
// 100 draws, (h, r, t') not a known fact.
std::vector<Triple> NegativeSampleSelfAdv(const Triple& triple, std::size_t n,
                                          const KnowledgeGraph& kg, Rng& rng);

using HeadRelationPair = std::pair<EntityId, RelationId>;

// Fully random negatives (h', r', t') with (h', r') drawn from public pairs
// and t' uniform over entities. Reads only the entity count of `kg`.
std::vector<Triple> NegativeSampleRandom(std::span<const HeadRelationPair> public_pairs,
                                         std::size_t n, const KnowledgeGraph& kg,
                                         Rng& rng);

// Candidate triple for membership inference, addressed by names so every
// party can resolve it in its own vocabulary.
struct Candidate {
  std::string head;
  std::string rel;
  std::string tail;
  bool member = false;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  std::size_t num_members() const;
};

struct CandidateOptions {
  // Restricts both endpoints of every candidate to these victim-local ids.
  std::optional<std::vector<EntityId>> entity_pool;
  // Extra facts (by name) a non-member must not coincide with.
  const KnowledgeGraph* exclude = nullptr;
};

// Members are drawn without replacement from the victim's training split;
// non-members are random (h, r, t) over the victim's vocabularies that are
// not facts of the victim.
CandidateSet BuildCandidateSet(const ClientDataset& victim, std::size_t n_members,
                               std::size_t n_nonmembers, std::uint64_t seed,
                               const CandidateOptions& options = {});

}  // namespace fkge::kg

#endif  // FKGE_KG_FEDERATED_H_
